#pragma once

#include "cohere/attention.hpp"
#include "cohere/attgraph.hpp"
#include "cohere/features.hpp"
#include "cohere/motionseg.hpp"
#include "cohere/objective.hpp"
#include "cohere/openset.hpp"
#include "cohere/stream.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohere {

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct F1Report {
  std::string scope;
  std::vector<ClassScore> classes;  // index = class id, 0 is unknown
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double macro_f1 = 0.0;
};

/// One-vs-rest scores for classes 0..m-1. A class absent from both sides
/// scores 1; otherwise 0/0 is 0.
F1Report f1_scores(std::span<const int> predicted, std::span<const int> truth, int m, std::string scope = "");

struct ProtocolConfig {
  int learn_laps = 25;
  int supervise_through_lap = 30;
  int eval_lap = 31;
  int supervisions_per_object = 3;
  int min_spacing = 100;  // frames between supervisions of one object
  bool exclude_saccades = false;

  void validate() const;
};

struct PlannedSupervision {
  SupervisionEvent event;
  int object = 0;
  bool fallback = false;  // attention never landed on the object; centroid used
};

/// Supervision k of an object is placed at the first frame from its
/// designated lap on, and at least min_spacing after the previous one, where
/// the attention pixel lies inside the object (not on its outline).
std::vector<PlannedSupervision> schedule_supervisions(const StreamBundle& bundle,
                                                      const std::vector<AttentionState>& trajectory,
                                                      const ProtocolConfig& protocol);

struct XiGrid {
  double lo = 0.01;
  double hi = 2.0;
  double step = 0.01;

  std::vector<double> values() const;
};

enum class SupervisionSource { schedule, bundle };

struct RunSettings {
  ExtractorConfig extractor;
  LossWeights loss;
  AttentionParams attention;
  std::optional<AttentionState> initial;  // frame center at rest when unset
  double gamma = 0.1;
  Connectivity connectivity = Connectivity::four;
  std::int64_t e = 1000;
  SamplerOptions sampler;
  DistanceKind distance = DistanceKind::cosine;
  std::optional<double> xi;  // unset: tuned on the eval lap
  int b = 0;                 // 0 means 1 + 3 n
  XiGrid xi_grid;
  ProtocolConfig protocol;
  SupervisionSource supervision_source = SupervisionSource::schedule;
  std::uint64_t seed = 0;

  void validate(const StreamManifest& manifest) const;
  int batch_cap(const StreamManifest& manifest) const { return b > 0 ? b : 1 + 3 * manifest.object_count(); }
};

/// Prediction inputs at the attention pixel of one eval-lap frame.
struct TrajectoryScore {
  int frame = 0;
  Pixel at;
  int truth = 0;
  int nearest_class = 0;
  double min_distance = 0.0;
  bool saccade = false;
};

/// Per-pixel nearest class and distance of one eval-lap frame.
struct FrameScore {
  int frame = 0;
  Mask truth;
  Field<std::uint16_t> nearest;
  FieldD min_distance;
};

struct RunResult {
  std::vector<AttentionState> trajectory;
  std::vector<std::pair<int, LossReport>> losses;
  std::vector<PlannedSupervision> supervisions;
  std::vector<TrajectoryScore> trajectory_scores;
  std::vector<FrameScore> frame_scores;
  double xi = 0.0;
  bool xi_tuned = false;
  int class_count = 0;
  F1Report trajectory_f1;
  F1Report frame_f1;
  ExtractorConfig extractor;
  Weights weights;
  TemplateStore store{DistanceKind::cosine, 1.0, 1};
  int skipped_steps = 0;
  bool eval_weights_unchanged = true;
  std::vector<std::string> log;  // notable events, in order
};

/// Runs the lap protocol frame by frame: attention, segmentation, graph
/// sampling, forward, losses, update, template refresh, eval-lap prediction.
RunResult run_protocol(const StreamBundle& bundle, const RunSettings& settings);

F1Report trajectory_f1(const std::vector<TrajectoryScore>& scores, double xi, int m, bool exclude_saccades);
F1Report frame_f1(const std::vector<FrameScore>& scores, double xi, int m);

struct XiChoice {
  double xi = 0.0;
  double macro_f1 = 0.0;
};

/// Smallest grid value reaching the best trajectory macro-F1.
XiChoice tune_xi(const std::vector<TrajectoryScore>& scores, int m, const XiGrid& grid, bool exclude_saccades);

// --- artifacts ---------------------------------------------------------------

std::string format_metrics(const std::vector<F1Report>& reports);

inline constexpr const char* kTrajectoryScoresHeader = "t,x,y,truth,nearest_class,min_distance,saccade";
std::string format_trajectory_scores(const std::vector<TrajectoryScore>& scores);
std::vector<TrajectoryScore> parse_trajectory_scores(std::string_view text);

void write_frame_scores(const std::filesystem::path& path, const std::vector<FrameScore>& scores);
std::vector<FrameScore> read_frame_scores(const std::filesystem::path& path);

/// Writes every run artifact under `dir` and returns the written paths.
std::vector<std::filesystem::path> write_run_artifacts(const RunResult& result, const std::string& config_echo,
                                                       const std::filesystem::path& dir);

}  // namespace cohere
