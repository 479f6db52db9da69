#include "cohere/commands.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace cohere {

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = {
      "bundle", "out", "seed",
      // objective
      "alpha", "lambda_t", "lambda_s", "lambda_c", "epsilon", "normalize",
      // extractor
      "layers", "kernel", "hidden", "d", "activation",
      // graph
      "e", "beta", "max_rounds", "gamma", "connectivity",
      // attention
      "nu", "rho", "dt", "alpha_b", "alpha_m", "eps_phi", "inhibition_eta", "inhibition_radius", "inhibition_kappa",
      "a0_x", "a0_y",
      // classifier
      "xi", "b", "distance", "xi_grid_lo", "xi_grid_hi", "xi_grid_step",
      // protocol
      "learn_laps", "supervise_through_lap", "eval_lap", "supervisions_per_object", "min_spacing", "exclude_saccades",
      "supervision_source"};
  return keys;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

class Values {
 public:
  explicit Values(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& k) const { return kv_.count(k) != 0; }

  template <typename T, typename Parse>
  void get(const std::string& k, T& dst, Parse parse) {
    auto it = kv_.find(k);
    if (it == kv_.end()) return;
    try {
      dst = parse(it->second);
    } catch (const FormatError& e) {
      errors_.push_back(k + ": " + e.what());
    } catch (const ValidationError& e) {
      errors_.push_back(k + ": " + e.what());
    }
  }
  void real(const std::string& k, double& dst) { get(k, dst, [](const std::string& v) { return io::parse_double(v); }); }
  void integer(const std::string& k, int& dst) {
    get(k, dst, [](const std::string& v) { return static_cast<int>(io::parse_int(v)); });
  }
  void integer64(const std::string& k, std::int64_t& dst) {
    get(k, dst, [](const std::string& v) { return static_cast<std::int64_t>(io::parse_int(v)); });
  }
  void flag(const std::string& k, bool& dst) {
    get(k, dst, [](const std::string& v) {
      if (v == "1" || v == "true") return true;
      if (v == "0" || v == "false") return false;
      throw FormatError("expected 0/1/true/false, got \"" + v + "\"");
    });
  }
  const std::string& raw(const std::string& k) const { return kv_.at(k); }
  std::vector<std::string>& errors() { return errors_; }

 private:
  std::map<std::string, std::string> kv_;
  std::vector<std::string> errors_;
};

std::uint64_t parse_u64(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError("not an unsigned integer: \"" + v + "\"");
  }
  try {
    return std::stoull(v);
  } catch (const std::out_of_range&) {
    throw FormatError("out of range: \"" + v + "\"");
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base, bool require_paths) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> errors;
  const auto& known = run_config_keys();
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key=value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      errors.push_back("unknown key \"" + key + "\"");
    } else if (!kv.emplace(key, value).second) {
      errors.push_back("duplicate key \"" + key + "\"");
    }
  }
  if (require_paths) {
    for (const char* k : {"bundle", "out"}) {
      if (!kv.count(k)) errors.push_back(std::string("missing required key \"") + k + "\"");
    }
  }

  Values v(std::move(kv));
  RunConfig c;
  c.text = std::string(text);
  auto path_of = [&](const std::string& k) {
    std::filesystem::path p = v.raw(k);
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  if (v.has("bundle")) c.bundle = path_of("bundle");
  if (v.has("out")) c.out = path_of("out");

  RunSettings& s = c.settings;
  v.get("seed", s.seed, parse_u64);
  s.extractor.seed = s.seed;

  // Desk-scale defaults, frozen from the 64x64 smoke pilot. The losses sum
  // over about a thousand pairs, so the step is far below the module default.
  s.extractor.layers = 3;
  s.extractor.hidden = {16, 16};
  s.extractor.d = 16;
  s.loss.alpha = 5e-6;
  s.loss.lambda_t = 0.1;
  s.loss.lambda_s = 1e-4;
  s.loss.lambda_c = 1.0;
  v.real("alpha", s.loss.alpha);
  v.real("lambda_t", s.loss.lambda_t);
  v.real("lambda_s", s.loss.lambda_s);
  v.real("lambda_c", s.loss.lambda_c);
  v.real("epsilon", s.loss.epsilon);
  v.flag("normalize", s.loss.normalized);
  s.extractor.normalize = s.loss.normalized;

  v.integer("layers", s.extractor.layers);
  v.integer("kernel", s.extractor.kernel);
  v.get("hidden", s.extractor.hidden, [](const std::string& value) {
    std::vector<int> out;
    std::istringstream parts(value);
    std::string part;
    while (std::getline(parts, part, ',')) out.push_back(static_cast<int>(io::parse_int(part)));
    return out;
  });
  v.integer("d", s.extractor.d);
  v.get("activation", s.extractor.activation, [](const std::string& value) {
    if (value == "tanh") return Activation::tanh;
    if (value == "relu") return Activation::relu;
    throw FormatError("expected tanh or relu, got \"" + value + "\"");
  });

  v.integer64("e", s.e);
  v.integer("beta", s.sampler.beta);
  v.integer("max_rounds", s.sampler.max_rounds);
  v.real("gamma", s.gamma);
  v.get("connectivity", s.connectivity, [](const std::string& value) {
    if (value == "4") return Connectivity::four;
    if (value == "8") return Connectivity::eight;
    throw FormatError("expected 4 or 8, got \"" + value + "\"");
  });

  v.real("nu", s.attention.nu);
  v.real("rho", s.attention.rho);
  v.real("dt", s.attention.dt);
  v.real("alpha_b", s.attention.alpha_b);
  v.real("alpha_m", s.attention.alpha_m);
  v.real("eps_phi", s.attention.eps_phi);
  v.real("inhibition_eta", s.attention.eta);
  v.real("inhibition_radius", s.attention.inhibition_radius);
  v.real("inhibition_kappa", s.attention.kappa);
  if (v.has("a0_x") != v.has("a0_y")) {
    v.errors().push_back("a0_x and a0_y must be given together");
  } else if (v.has("a0_x")) {
    AttentionState a0;
    v.real("a0_x", a0.position.x());
    v.real("a0_y", a0.position.y());
    s.initial = a0;
  }

  if (v.has("xi")) {
    if (v.raw("xi") == "tune") {
      s.xi.reset();
    } else {
      double xi = 0.0;
      v.real("xi", xi);
      s.xi = xi;
    }
  }
  v.integer("b", s.b);
  v.get("distance", s.distance, [](const std::string& value) {
    if (value == "cosine") return DistanceKind::cosine;
    if (value == "squared_euclidean") return DistanceKind::squared_euclidean;
    throw FormatError("expected cosine or squared_euclidean, got \"" + value + "\"");
  });
  v.real("xi_grid_lo", s.xi_grid.lo);
  v.real("xi_grid_hi", s.xi_grid.hi);
  v.real("xi_grid_step", s.xi_grid.step);

  v.integer("learn_laps", s.protocol.learn_laps);
  v.integer("supervise_through_lap", s.protocol.supervise_through_lap);
  v.integer("eval_lap", s.protocol.eval_lap);
  v.integer("supervisions_per_object", s.protocol.supervisions_per_object);
  v.integer("min_spacing", s.protocol.min_spacing);
  v.flag("exclude_saccades", s.protocol.exclude_saccades);
  v.get("supervision_source", s.supervision_source, [](const std::string& value) {
    if (value == "schedule") return SupervisionSource::schedule;
    if (value == "bundle") return SupervisionSource::bundle;
    throw FormatError("expected schedule or bundle, got \"" + value + "\"");
  });

  errors.insert(errors.end(), v.errors().begin(), v.errors().end());
  if (errors.empty()) {
    try {
      s.extractor.validate();
      s.loss.validate();
      s.attention.validate();
      s.protocol.validate();
      if (!s.xi) (void)s.xi_grid.values();
    } catch (const ValidationError& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid run config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, bool require_paths) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const FormatError& e) {
    throw ValidationError(e.what());
  }
  return parse_run_config(text, path.parent_path(), require_paths);
}

}  // namespace cohere
