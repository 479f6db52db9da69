#pragma once

#include "cohere/features.hpp"
#include "cohere/stream.hpp"
#include "cohere/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <vector>

namespace cohere {

enum class DistanceKind { squared_euclidean, cosine };

/// |a - b|^2, or 1 - <a, b> / (|a| |b|) (1 when either vector is zero).
double template_distance(DistanceKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct TemplateEntry {
  Eigen::VectorXd k;
  int class_id = 1;
  int frame = 0;
  Pixel at;
  std::uint64_t version = 0;  // weights version k was computed with
  bool stale = false;         // source frame unavailable at the last refresh
};

struct Prediction {
  int class_id = 0;  // 0 = unknown
  int nearest_class = 0;  // class of the nearest template regardless of xi; 0 when empty
  double min_distance = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, double>> scores;  // (class, -min distance), ascending class id
};

/// Frame lookup for refresh; null when the frame is not available.
using FrameSource = std::function<const Frame*(int)>;

/// Nearest-template open-set classifier with template refresh.
class TemplateStore {
 public:
  TemplateStore(DistanceKind kind, double xi, int b);

  DistanceKind kind() const { return kind_; }
  double xi() const { return xi_; }
  void set_xi(double xi);
  int batch_cap() const { return b_; }
  const std::vector<TemplateEntry>& entries() const { return entries_; }
  std::set<int> known_classes() const;

  void add_supervision(const Eigen::VectorXd& k, int class_id, int frame, Pixel at, int width, int height,
                       std::uint64_t version = 0);

  Prediction predict(const Eigen::VectorXd& f) const;

  struct MapPrediction {
    Mask classes;            // thresholded at xi
    Field<std::uint16_t> nearest;  // nearest class ignoring xi
    FieldD min_distance;
  };
  MapPrediction predict_map(const FeatureMap& map) const;

  /// Re-encodes the templates of up to b - 1 supervised frames, chosen
  /// round-robin, with the given weights. Frames whose entries already carry
  /// `weights.version` are left alone. Returns the refreshed frame ids.
  std::vector<int> refresh_templates(const Weights& weights, const ExtractorConfig& config, const FrameSource& frames);

  void save(const std::filesystem::path& path) const;
  static TemplateStore load(const std::filesystem::path& path, DistanceKind kind, double xi, int b);

 private:
  DistanceKind kind_;
  double xi_;
  int b_;
  std::vector<TemplateEntry> entries_;
  std::size_t cursor_ = 0;  // round-robin position over distinct supervised frames
};

}  // namespace cohere
