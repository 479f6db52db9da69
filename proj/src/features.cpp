#include "cohere/features.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cohere {

void ExtractorConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("extractor: " + what);
  };
  require(in_channels >= 1, "in_channels must be >= 1");
  require(layers >= 1, "layers must be >= 1");
  require(kernel >= 1 && kernel % 2 == 1, "kernel must be a positive odd integer");
  require(static_cast<int>(hidden.size()) == layers - 1,
          "hidden lists " + std::to_string(hidden.size()) + " widths, layers needs " + std::to_string(layers - 1));
  for (int c : hidden) require(c >= 1, "hidden widths must be >= 1");
  require(d >= 1, "d must be >= 1");
}

int ExtractorConfig::channels_in(int l) const { return l == 0 ? in_channels : hidden[static_cast<std::size_t>(l - 1)]; }

int ExtractorConfig::channels_out(int l) const { return l == layers - 1 ? d : hidden[static_cast<std::size_t>(l)]; }

std::string ExtractorConfig::to_text() const {
  std::ostringstream os;
  os << "in_channels=" << in_channels << "\nlayers=" << layers << "\nkernel=" << kernel << "\nhidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
  os << "\nd=" << d << "\nactivation=" << (activation == Activation::tanh ? "tanh" : "relu")
     << "\nnormalize=" << (normalize ? 1 : 0) << "\nseed=" << seed << '\n';
  return os.str();
}

ExtractorConfig ExtractorConfig::parse(std::string_view text) {
  ExtractorConfig c;
  c.hidden.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("extractor config: malformed line \"" + line + "\"");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "in_channels") {
      c.in_channels = static_cast<int>(io::parse_int(value));
    } else if (key == "layers") {
      c.layers = static_cast<int>(io::parse_int(value));
    } else if (key == "kernel") {
      c.kernel = static_cast<int>(io::parse_int(value));
    } else if (key == "hidden") {
      std::istringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ',')) c.hidden.push_back(static_cast<int>(io::parse_int(part)));
    } else if (key == "d") {
      c.d = static_cast<int>(io::parse_int(value));
    } else if (key == "activation") {
      if (value == "tanh") {
        c.activation = Activation::tanh;
      } else if (value == "relu") {
        c.activation = Activation::relu;
      } else {
        throw FormatError("extractor config: unknown activation \"" + value + "\"");
      }
    } else if (key == "normalize") {
      c.normalize = io::parse_int(value) != 0;
    } else if (key == "seed") {
      c.seed = std::stoull(value);
    } else {
      throw FormatError("extractor config: unknown key \"" + key + "\"");
    }
  }
  return c;
}

Weights init_weights(const ExtractorConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Weights w;
  for (int l = 0; l < config.layers; ++l) {
    const int cin = config.channels_in(l), cout = config.channels_out(l), k = config.kernel;
    const double bound = std::sqrt(1.0 / (k * k * cin));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor kernel({k, k, cin, cout});
    for (Eigen::Index i = 0; i < kernel.size(); ++i) kernel[i] = u(rng);
    w.tensors.push_back(std::move(kernel));
    w.tensors.push_back(Tensor({cout}));
  }
  return w;
}

Tensor frame_tensor(const Frame& frame) {
  const int h = frame.height(), w = frame.width(), c = frame.channel_count();
  Tensor t({h, w, c});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < c; ++k) {
        t[(static_cast<Eigen::Index>(y) * w + x) * c + k] = frame.channels[static_cast<std::size_t>(k)](y, x);
      }
    }
  }
  return t;
}

ForwardGraph forward(Tape& tape, const Tensor& input, const Weights& weights, const ExtractorConfig& config,
                     bool trainable) {
  config.validate();
  if (input.rank() != 3 || input.shape()[2] != config.in_channels) {
    throw ShapeError("forward: input " + to_string(input.shape()) + " does not match in_channels " +
                     std::to_string(config.in_channels));
  }
  if (static_cast<int>(weights.tensors.size()) != 2 * config.layers) {
    throw ShapeError("forward: expected " + std::to_string(2 * config.layers) + " weight tensors, got " +
                     std::to_string(weights.tensors.size()));
  }
  for (int l = 0; l < config.layers; ++l) {
    const Shape ks{config.kernel, config.kernel, config.channels_in(l), config.channels_out(l)};
    const auto& kt = weights.tensors[static_cast<std::size_t>(2 * l)];
    const auto& bt = weights.tensors[static_cast<std::size_t>(2 * l + 1)];
    if (kt.shape() != ks || bt.shape() != Shape{config.channels_out(l)}) {
      throw ShapeError("forward: layer " + std::to_string(l) + " weights " + to_string(kt.shape()) + "/" +
                       to_string(bt.shape()) + " do not match config " + to_string(ks));
    }
  }

  ForwardGraph g;
  for (const auto& t : weights.tensors) g.params.push_back(trainable ? tape.variable(t) : tape.constant(t));
  Var x = tape.constant(input);
  for (int l = 0; l < config.layers; ++l) {
    x = tape.conv2d(x, g.params[static_cast<std::size_t>(2 * l)], g.params[static_cast<std::size_t>(2 * l + 1)]);
    if (l + 1 < config.layers) x = config.activation == Activation::tanh ? tape.tanh(x) : tape.relu(x);
  }
  const int h = input.shape()[0], w = input.shape()[1];
  x = tape.reshape(x, {h * w, config.d});
  if (config.normalize) x = tape.l2norm_rows(x);
  g.features = x;
  return g;
}

FeatureMap extract(const Frame& frame, const Weights& weights, const ExtractorConfig& config) {
  Tape tape;
  const auto g = forward(tape, frame_tensor(frame), weights, config, false);
  FeatureMap map;
  map.width = frame.width();
  map.height = frame.height();
  map.frame = frame.index;
  map.version = weights.version;
  map.values = tape.value(g.features).as_matrix();
  return map;
}

Eigen::VectorXd restrict(const FeatureMap& map, Pixel x) {
  if (!in_frame(x, map.width, map.height)) {
    throw BoundsError("restrict: pixel (" + std::to_string(x.x) + "," + std::to_string(x.y) + ") outside " +
                      std::to_string(map.width) + "x" + std::to_string(map.height) + " (coordinates are 1-based)");
  }
  return map.values.row(ravel(x, map.width)).transpose();
}

void save_weights(const std::filesystem::path& path, const ExtractorConfig& config, const Weights& weights) {
  io::ByteWriter out;
  out.magic("WGT1");
  out.text(config.to_text());
  out.u32(static_cast<std::uint32_t>(weights.version & 0xffffffffu));
  out.u32(static_cast<std::uint32_t>(weights.version >> 32));
  out.u32(static_cast<std::uint32_t>(weights.tensors.size()));
  for (const auto& t : weights.tensors) {
    out.u32(static_cast<std::uint32_t>(t.rank()));
    for (int s : t.shape()) out.u32(static_cast<std::uint32_t>(s));
    for (Eigen::Index i = 0; i < t.size(); ++i) out.f64(t[i]);
  }
  out.save(path);
}

std::pair<ExtractorConfig, Weights> load_weights(const std::filesystem::path& path) {
  auto in = io::ByteReader::load(path);
  in.expect_magic("WGT1");
  ExtractorConfig config = ExtractorConfig::parse(in.text());
  Weights w;
  w.version = in.u32();
  w.version |= static_cast<std::uint64_t>(in.u32()) << 32;
  const auto count = in.u32();
  if (count > 4096) throw FormatError(path.string() + ": implausible tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = in.u32();
    if (rank > 8) throw FormatError(path.string() + ": implausible tensor rank");
    Shape shape;
    std::int64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(static_cast<int>(in.u32()));
      n *= shape.back();
      if (shape.back() < 1 || n > (std::int64_t{1} << 28)) throw FormatError(path.string() + ": bad tensor shape");
    }
    Tensor t(shape);
    for (Eigen::Index k = 0; k < t.size(); ++k) t[k] = in.f64();
    w.tensors.push_back(std::move(t));
  }
  in.expect_end();
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return {config, w};
}

}  // namespace cohere
