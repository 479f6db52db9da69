#pragma once

#include "cohere/motionseg.hpp"
#include "cohere/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace cohere {

struct GraphBudget {
  std::int64_t e = 0;  // target edges per type
  std::int64_t s = 0;  // in-region nodes
  std::int64_t o = 0;  // out-region nodes
};

/// s = floor((1 + sqrt(1 + 8e)) / 2), o = ceil(e / s), in exact integer arithmetic.
GraphBudget node_budget(std::int64_t e);

std::int64_t isqrt(std::int64_t n);

struct StochasticGraph {
  std::vector<Pixel> inside;   // inside[0] is the attention point
  std::vector<Pixel> outside;
  bool outside_short = false;  // draws ran out before o outside nodes were found
  int draws = 0;

  std::int64_t positive_edges() const {
    const auto k = static_cast<std::int64_t>(inside.size());
    return k * (k - 1) / 2;
  }
  std::int64_t negative_edges() const {
    return static_cast<std::int64_t>(inside.size()) * static_cast<std::int64_t>(outside.size());
  }
};

struct SamplerOptions {
  int beta = 1;        // spread factor, sigma = beta * sqrt(|S_t|)
  int max_rounds = 0;  // Gaussian draws allowed; 0 means 20 * o
};

/// Empty region gives no graph. Otherwise `a` plus a uniform sample of the
/// region, and rounded Gaussian draws around `a` kept when they fall in the
/// frame, outside the region, and are new.
std::optional<StochasticGraph> sample_graph(const MovingRegion& region, Pixel a, const GraphBudget& budget,
                                            const SamplerOptions& options, std::mt19937_64& rng);

}  // namespace cohere
