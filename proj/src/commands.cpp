#include "cohere/commands.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace cohere {

namespace {

void log(const std::string& msg) { std::cerr << "[cohere] " << msg << '\n'; }

std::map<std::string, std::string> read_meta(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(io::read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out.emplace(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> cmd_generate(const GenerateOptions& options) {
  if (options.out.empty()) throw ValidationError("generate: output directory required");
  const SceneSpec scene = scene_preset(options.preset, options.scene);
  StreamBundle bundle = generate_stream(scene, options.scene.seed);

  const ProtocolConfig protocol;
  bool long_enough = true;
  for (int o = 0; o < bundle.manifest.object_count(); ++o) {
    long_enough = long_enough && static_cast<int>(bundle.manifest.laps_of(o).size()) >= protocol.supervise_through_lap;
  }
  if (long_enough) {
    const AttentionParams params;
    const auto trajectory = simulate_trajectory(bundle, params, default_initial_state(scene.width, scene.height));
    for (const auto& s : schedule_supervisions(bundle, trajectory, protocol)) bundle.supervisions.push_back(s.event);
  } else {
    log("generate: stream shorter than the supervision window, sup.csv left empty");
  }
  write_bundle(bundle, options.out);
  log("generate: " + options.preset + ", " + std::to_string(bundle.manifest.frame_count) + " frames");
  return {options.out};
}

std::vector<std::filesystem::path> cmd_foa(const std::filesystem::path& bundle_dir, const RunSettings& settings,
                                           const std::filesystem::path& out) {
  const StreamBundle bundle = read_bundle(bundle_dir);
  const auto& m = bundle.manifest;
  const auto trajectory =
      simulate_trajectory(bundle, settings.attention, settings.initial.value_or(default_initial_state(m.width, m.height)));
  write_foa(trajectory, out);
  const auto saccades = std::count_if(trajectory.begin(), trajectory.end(), [](const AttentionState& s) { return s.saccade; });
  log("foa: " + std::to_string(trajectory.size()) + " frames, " + std::to_string(saccades) + " saccade frames");
  return {out};
}

RunOutcome cmd_run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const StreamBundle bundle = read_bundle(config.bundle);
  RunSettings settings = config.settings;
  settings.extractor.in_channels = bundle.manifest.channels;
  settings.validate(bundle.manifest);

  RunOutcome outcome;
  outcome.result = run_protocol(bundle, settings);
  outcome.artifacts = write_run_artifacts(outcome.result, config.text, config.out);
  const auto& r = outcome.result;
  for (const auto& line : r.log) log("run: " + line);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log("run: xi " + io::format_double(r.xi) + (r.xi_tuned ? " (tuned)" : "") + ", trajectory macro-F1 " +
      io::format_double(r.trajectory_f1.macro_f1) + ", frame macro-F1 " + io::format_double(r.frame_f1.macro_f1) +
      ", " + std::to_string(secs) + " s");
  return outcome;
}

EvalOutcome cmd_eval(const std::filesystem::path& run_dir, std::optional<double> xi) {
  const auto meta = read_meta(run_dir / "run_meta.txt");
  if (!meta.count("xi") || !meta.count("classes")) throw FormatError("eval: run_meta.txt lacks xi or classes");
  const RunConfig config = parse_run_config(io::read_text_file(run_dir / "config.txt"), {}, false);
  const int m = static_cast<int>(io::parse_int(meta.at("classes")));

  EvalOutcome out;
  out.xi = xi.value_or(io::parse_double(meta.at("xi")));
  if (!(out.xi > 0)) throw ValidationError("eval: xi must be > 0");
  const auto traj = parse_trajectory_scores(io::read_text_file(run_dir / "trajectory_scores.csv"));
  out.trajectory = trajectory_f1(traj, out.xi, m, config.settings.protocol.exclude_saccades);
  out.frame = frame_f1(read_frame_scores(run_dir / "frame_scores.evs"), out.xi, m);
  out.metrics = run_dir / "eval_metrics.csv";
  io::write_text_file(out.metrics, format_metrics({out.trajectory, out.frame}));
  log("eval: xi " + io::format_double(out.xi) + ", trajectory macro-F1 " + io::format_double(out.trajectory.macro_f1) +
      ", frame macro-F1 " + io::format_double(out.frame.macro_f1));
  return out;
}

TuneOutcome cmd_tune_xi(const std::filesystem::path& run_dir, const XiGrid& grid) {
  const auto meta = read_meta(run_dir / "run_meta.txt");
  if (!meta.count("classes")) throw FormatError("tune-xi: run_meta.txt lacks classes");
  const RunConfig config = parse_run_config(io::read_text_file(run_dir / "config.txt"), {}, false);
  const int m = static_cast<int>(io::parse_int(meta.at("classes")));
  const bool exclude = config.settings.protocol.exclude_saccades;
  const auto traj = parse_trajectory_scores(io::read_text_file(run_dir / "trajectory_scores.csv"));

  TuneOutcome out;
  out.best = tune_xi(traj, m, grid, exclude);
  std::string table = "xi,macro_f1\n";
  for (double xi : grid.values()) {
    table += io::format_double(xi) + ',' + io::format_double(trajectory_f1(traj, xi, m, exclude).macro_f1) + '\n';
  }
  out.table = run_dir / "xi_tuning.csv";
  io::write_text_file(out.table, table);
  log("tune-xi: best xi " + io::format_double(out.best.xi) + ", trajectory macro-F1 " +
      io::format_double(out.best.macro_f1));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct SyntheticRegion {
  int width = 0;
  int height = 0;
  MovingRegion region;
  Pixel center;
  std::vector<Pixel> outside;  // complement of the region
};

// Square map of about twice the region's area; the region holds the pixels
// closest to the map center.
SyntheticRegion make_region(int size) {
  SyntheticRegion s;
  const int side = static_cast<int>(std::ceil(std::sqrt(2.0 * size)));
  s.width = s.height = side;
  s.center = {(side + 1) / 2, (side + 1) / 2};
  std::vector<Pixel> all;
  for (int y = 1; y <= side; ++y) {
    for (int x = 1; x <= side; ++x) all.push_back({x, y});
  }
  auto dist2 = [&](Pixel p) {
    const long dx = p.x - s.center.x, dy = p.y - s.center.y;
    return dx * dx + dy * dy;
  };
  std::stable_sort(all.begin(), all.end(), [&](Pixel a, Pixel b) { return dist2(a) < dist2(b); });
  s.region.width = s.region.height = side;
  s.region.member = Field<std::uint8_t>::Zero(side, side);
  for (int i = 0; i < size; ++i) {
    s.region.coords.push_back(all[static_cast<std::size_t>(i)]);
    s.region.member(all[static_cast<std::size_t>(i)].y - 1, all[static_cast<std::size_t>(i)].x - 1) = 1;
  }
  std::sort(s.region.coords.begin(), s.region.coords.end(),
            [side](Pixel a, Pixel b) { return ravel(a, side) < ravel(b, side); });
  s.region.contains_attention = true;
  s.outside.assign(all.begin() + size, all.end());
  return s;
}

// Loss and gradient with respect to the features of the nodes involved. The
// scatter of that gradient into the full map is shared by both modes and left out.
double coherence_step(const Tensor& map, int width, const std::vector<Pixel>& inside, const std::vector<Pixel>& outside,
                      bool normalized) {
  const auto rows = [&](const std::vector<Pixel>& px) {
    Tensor t({static_cast<int>(px.size()), map.shape()[1]});
    for (std::size_t i = 0; i < px.size(); ++i) {
      t.as_matrix().row(static_cast<Eigen::Index>(i)) = map.as_matrix().row(ravel(px[i], width));
    }
    return t;
  };
  Tape tape;
  const Var in = tape.variable(rows(inside));
  const Var out = tape.variable(rows(outside));
  const Var loss = tape.add(spatial_loss(tape, in, normalized), contrastive_loss(tape, in, out, 1e-3, normalized));
  const Gradients g = tape.backward(loss);
  return tape.value(loss).item() + g[in][0] + g[out][0];
}

}  // namespace

std::vector<BenchCell> run_bench(const BenchOptions& options) {
  if (options.repeats < 3) throw ValidationError("bench: repeats must be >= 3");
  if (!(options.min_sample_s >= 0.0)) throw ValidationError("bench: min_sample_s must be >= 0");
  if (options.dims.empty() || options.region_sizes.empty()) throw ValidationError("bench: empty d or size list");
  for (int d : options.dims) {
    if (d < 1) throw ValidationError("bench: d must be >= 1");
  }
  for (int s : options.region_sizes) {
    if (s < 2) throw ValidationError("bench: region size must be >= 2");
  }
  const GraphBudget budget = node_budget(options.e);
  std::mt19937_64 rng(options.seed);
  std::vector<BenchCell> cells;
  std::vector<std::function<void()>> steps;  // one per timed cell
  std::vector<std::size_t> timed;
  std::vector<SyntheticRegion> regions;
  std::vector<Tensor> maps;
  regions.reserve(options.region_sizes.size());
  maps.reserve(options.region_sizes.size() * options.dims.size());
  volatile double sink = 0.0;

  for (int size : options.region_sizes) {
    const SyntheticRegion& s = regions.emplace_back(make_region(size));
    for (int d : options.dims) {
      Tensor& map = maps.emplace_back(std::vector<int>{s.width * s.height, d});
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Eigen::Index i = 0; i < map.size(); ++i) map[i] = u(rng);
      if (options.normalized) map.as_matrix().rowwise().normalize();

      for (const char* mode : {"stochastic", "exhaustive"}) {
        BenchCell cell;
        cell.mode = mode;
        cell.d = d;
        cell.region_size = size;
        const bool exhaustive = cell.mode == "exhaustive";
        const auto k = static_cast<std::int64_t>(size);
        const std::int64_t pairs = k * (k - 1) / 2 + k * static_cast<std::int64_t>(s.outside.size());
        cell.skipped = exhaustive && pairs > options.pair_cap;
        if (!cell.skipped) {
          timed.push_back(cells.size());
          steps.push_back([&, exhaustive] {
            if (exhaustive) {
              sink = sink + coherence_step(map, s.width, s.region.coords, s.outside, options.normalized);
            } else {
              const auto graph = sample_graph(s.region, s.center, budget, {options.beta, 0}, rng);
              if (graph->outside.empty()) throw Error("bench: no outside nodes sampled");
              sink = sink + coherence_step(map, s.width, graph->inside, graph->outside, options.normalized);
            }
          });
        }
        cells.push_back(cell);
      }
    }
  }

  for (const auto& step : steps) step();  // warm-up
  // Repeats are the outer loop so slow machine drift hits every cell alike.
  for (int r = 0; r < options.repeats; ++r) {
    for (std::size_t j = 0; j < steps.size(); ++j) {
      // average enough frames that one sample spans min_sample_s
      const auto t0 = std::chrono::steady_clock::now();
      double elapsed = 0.0;
      int frames = 0;
      do {
        steps[j]();
        ++frames;
        elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } while (elapsed < options.min_sample_s);
      cells[timed[j]].samples.push_back(elapsed / frames);
    }
  }

  for (auto& cell : cells) {
    if (cell.skipped) continue;
    const double n = static_cast<double>(cell.samples.size());
    cell.mean_s = std::accumulate(cell.samples.begin(), cell.samples.end(), 0.0) / n;
    double var = 0.0;
    for (double x : cell.samples) var += (x - cell.mean_s) * (x - cell.mean_s);
    cell.std_s = std::sqrt(var / (n - 1));
    std::vector<double> sorted = cell.samples;
    std::sort(sorted.begin(), sorted.end());
    cell.median_s = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                      : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  }
  return cells;
}

std::string format_bench(const std::vector<BenchCell>& cells) {
  std::string out = "mode,d,region_size,mean_s,std_s\n";
  for (const auto& c : cells) {
    out += c.mode + ',' + std::to_string(c.d) + ',' + std::to_string(c.region_size) + ',';
    out += c.skipped ? "skipped,skipped\n" : io::format_double(c.mean_s) + ',' + io::format_double(c.std_s) + '\n';
  }
  return out;
}

std::vector<std::filesystem::path> cmd_bench(const BenchOptions& options, const std::filesystem::path& out) {
  const auto cells = run_bench(options);
  io::write_text_file(out, format_bench(cells));
  for (const auto& c : cells) {
    if (c.skipped) log("bench: " + c.mode + " d=" + std::to_string(c.d) + " |S|=" + std::to_string(c.region_size) + " skipped");
  }
  return {out};
}

}  // namespace cohere
