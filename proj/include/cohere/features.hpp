#pragma once

#include "cohere/grad.hpp"
#include "cohere/stream.hpp"
#include "cohere/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cohere {

enum class Activation { tanh, relu };

struct ExtractorConfig {
  int in_channels = 3;
  int layers = 6;
  int kernel = 5;
  std::vector<int> hidden{16, 32, 32, 32, 32};  // layers - 1 widths
  int d = 32;
  Activation activation = Activation::tanh;
  bool normalize = true;
  std::uint64_t seed = 0;

  void validate() const;
  /// Channel count entering layer l, and leaving it.
  int channels_in(int l) const;
  int channels_out(int l) const;

  std::string to_text() const;
  static ExtractorConfig parse(std::string_view text);

  friend bool operator==(const ExtractorConfig&, const ExtractorConfig&) = default;
};

/// Kernel [K, K, Cin, Cout] then bias [Cout], per layer.
struct Weights {
  std::vector<Tensor> tensors;
  std::uint64_t version = 0;  // bumped by every applied update

  friend bool operator==(const Weights& a, const Weights& b) { return a.tensors == b.tensors; }
};

/// Uniform in +-sqrt(1 / fan_in), biases zero.
Weights init_weights(const ExtractorConfig& config);

/// Per-pixel features of one frame; row ravel(x) holds f_x.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int frame = 0;
  std::uint64_t version = 0;
  RowMatrixXd values;  // (w h) x d

  int dim() const { return static_cast<int>(values.cols()); }
};

/// Frame as an [H, W, C] tensor.
Tensor frame_tensor(const Frame& frame);

struct ForwardGraph {
  std::vector<Var> params;  // one per weight tensor
  Var features;             // [H W, d]
};

/// Records the extractor on `tape`. Parameters are variables when
/// `trainable`, constants otherwise.
ForwardGraph forward(Tape& tape, const Tensor& input, const Weights& weights, const ExtractorConfig& config,
                     bool trainable);

/// Forward pass without gradients.
FeatureMap extract(const Frame& frame, const Weights& weights, const ExtractorConfig& config);

/// f_x for a 1-based pixel.
Eigen::VectorXd restrict(const FeatureMap& map, Pixel x);

void save_weights(const std::filesystem::path& path, const ExtractorConfig& config, const Weights& weights);
std::pair<ExtractorConfig, Weights> load_weights(const std::filesystem::path& path);

}  // namespace cohere
