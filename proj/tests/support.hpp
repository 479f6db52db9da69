#pragma once

#include "cohere/grad.hpp"
#include "cohere/stream.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace cohere::test {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cohere_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Zero-flow frame of a constant color.
inline FlowField zero_flow(int w, int h) { return {FieldF::Zero(h, w), FieldF::Zero(h, w)}; }

inline Frame constant_frame(int w, int h, int channels, float value) {
  Frame f;
  f.channels.assign(static_cast<std::size_t>(channels), FieldF::Constant(h, w, value));
  return f;
}

}  // namespace cohere::test
