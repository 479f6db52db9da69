#include "cohere/attgraph.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace cohere {

std::int64_t isqrt(std::int64_t n) {
  if (n < 0) throw ValidationError("isqrt: negative argument");
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  // 128-bit squares: (r + 1)^2 overflows int64 near the top of the range
  const auto sq = [](std::int64_t v) { return static_cast<__int128>(v) * v; };
  while (sq(r) > n) --r;
  while (sq(r + 1) <= n) ++r;
  return r;
}

GraphBudget node_budget(std::int64_t e) {
  if (e < 1) throw ValidationError("node_budget: e must be >= 1, got " + std::to_string(e));
  if (e > (std::int64_t{1} << 58)) throw ValidationError("node_budget: e too large");
  // floor((1 + sqrt(n)) / 2) == floor((1 + isqrt(n)) / 2) for integer n.
  const std::int64_t s = (1 + isqrt(1 + 8 * e)) / 2;
  return {e, s, (e + s - 1) / s};
}

std::optional<StochasticGraph> sample_graph(const MovingRegion& region, Pixel a, const GraphBudget& budget,
                                            const SamplerOptions& options, std::mt19937_64& rng) {
  if (region.empty()) return std::nullopt;
  if (!region.contains(a)) throw ValidationError("sample_graph: attention point is not in the region");
  if (options.beta < 1) throw ValidationError("sample_graph: beta must be >= 1");
  if (budget.s < 1 || budget.o < 0) throw ValidationError("sample_graph: invalid budget");
  const int w = region.width, h = region.height;

  StochasticGraph g;
  g.inside.push_back(a);
  std::vector<Pixel> others;
  others.reserve(region.size() - 1);
  for (const Pixel& p : region.coords) {
    if (!(p == a)) others.push_back(p);
  }
  const auto take = static_cast<std::size_t>(std::min<std::int64_t>(budget.s - 1, static_cast<std::int64_t>(others.size())));
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
    std::swap(others[i], others[pick(rng)]);
    g.inside.push_back(others[i]);
  }

  const double sigma = options.beta * std::sqrt(static_cast<double>(region.size()));
  const std::int64_t rounds = options.max_rounds > 0 ? options.max_rounds : 20 * budget.o;
  std::normal_distribution<double> normal(0.0, sigma);
  std::unordered_set<std::int64_t> seen;
  while (static_cast<std::int64_t>(g.outside.size()) < budget.o && g.draws < rounds) {
    ++g.draws;
    const double dx = normal(rng);
    const double dy = normal(rng);
    const Pixel p{static_cast<int>(std::lround(a.x + dx)), static_cast<int>(std::lround(a.y + dy))};
    if (!in_frame(p, w, h) || region.contains(p)) continue;
    if (!seen.insert(ravel(p, w)).second) continue;
    g.outside.push_back(p);
  }
  g.outside_short = static_cast<std::int64_t>(g.outside.size()) < budget.o;
  return g;
}

}  // namespace cohere
