#pragma once

#include "cohere/evalkit.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cohere {

/// A parsed run configuration file (flat key=value lines, '#' comments).
struct RunConfig {
  std::filesystem::path bundle;
  std::filesystem::path out;
  RunSettings settings;
  std::string text;  // verbatim source, echoed into run artifacts
};

/// Throws ValidationError listing missing required keys, unknown keys, or bad
/// values. Relative paths resolve against `base`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base = {}, bool require_paths = true);
RunConfig load_run_config(const std::filesystem::path& path, bool require_paths = true);

/// All keys a run configuration may contain.
const std::vector<std::string>& run_config_keys();

struct GenerateOptions {
  std::string preset = "empty-2";
  std::filesystem::path out;
  PresetOptions scene;
};

/// Writes a generated bundle. sup.csv holds the supervision schedule of the
/// default attention and protocol settings when the stream is long enough.
std::vector<std::filesystem::path> cmd_generate(const GenerateOptions& options);

/// Attention-only pass over a bundle.
std::vector<std::filesystem::path> cmd_foa(const std::filesystem::path& bundle_dir, const RunSettings& settings,
                                           const std::filesystem::path& out);

struct RunOutcome {
  RunResult result;
  std::vector<std::filesystem::path> artifacts;
};
RunOutcome cmd_run(const RunConfig& config);

/// Recomputes metrics from a run directory, optionally at another xi.
/// Writes eval_metrics.csv there.
struct EvalOutcome {
  F1Report trajectory;
  F1Report frame;
  double xi = 0.0;
  std::filesystem::path metrics;
};
EvalOutcome cmd_eval(const std::filesystem::path& run_dir, std::optional<double> xi = std::nullopt);

/// Grid search of xi on the trajectory scores of a run; writes xi_tuning.csv.
struct TuneOutcome {
  XiChoice best;
  std::filesystem::path table;
};
TuneOutcome cmd_tune_xi(const std::filesystem::path& run_dir, const XiGrid& grid);

struct BenchOptions {
  std::vector<int> dims{32, 128};
  std::int64_t e = 10000;
  std::vector<int> region_sizes{100, 2000};
  int repeats = 3;
  std::int64_t pair_cap = 50'000'000;  // exhaustive cells above this are skipped
  double min_sample_s = 0.02;          // each sample averages frames until it spans this long
  bool normalized = true;
  int beta = 1;
  std::uint64_t seed = 0;
};

struct BenchCell {
  std::string mode;  // "stochastic" or "exhaustive"
  int d = 0;
  int region_size = 0;
  bool skipped = false;
  std::vector<double> samples;  // seconds per frame
  double mean_s = 0.0;
  double std_s = 0.0;
  double median_s = 0.0;
};

/// Wall-clock spatial + contrastive loss and gradient per frame on a
/// synthetic feature map twice the region's area.
std::vector<BenchCell> run_bench(const BenchOptions& options);
std::string format_bench(const std::vector<BenchCell>& cells);

/// run_bench, written as CSV to `out`.
std::vector<std::filesystem::path> cmd_bench(const BenchOptions& options, const std::filesystem::path& out);

}  // namespace cohere
