#include "cohere/attgraph.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace cohere;

namespace {

GraphBudget brute_budget(std::int64_t e) {
  std::int64_t s = 1;
  while ((s + 1) * s / 2 <= e) ++s;
  return {e, s, (e + s - 1) / s};
}

MovingRegion block_region(int w, int h, int x0, int y0, int bw, int bh) {
  FieldD speed = FieldD::Zero(h, w);
  speed.block(y0 - 1, x0 - 1, bh, bw).setConstant(1.0);
  return segment_moving_region(speed, {x0, y0}, 0.5);
}

double distance_to_region(Pixel p, const MovingRegion& r) {
  double best = 1e300;
  for (Pixel q : r.coords) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
  return best;
}

}  // namespace

TEST_CASE("budget examples") {
  CHECK(node_budget(20000).s == 200);
  CHECK(node_budget(20000).o == 100);
  CHECK(node_budget(1).s == 2);
  CHECK(node_budget(1).o == 1);
  CHECK(node_budget(1000).s == 45);
  CHECK(node_budget(1000).o == 23);
  CHECK_THROWS_AS(node_budget(0), ValidationError);
}

TEST_CASE("budget matches a brute-force search") {
  for (std::int64_t e = 1; e <= 5000; ++e) {
    const GraphBudget b = node_budget(e), want = brute_budget(e);
    CHECK(b.s == want.s);
    CHECK(b.o == want.o);
    CHECK(b.s * (b.s - 1) / 2 <= e);
    CHECK((b.s + 1) * b.s / 2 > e);
  }
  for (std::int64_t e : {std::int64_t{30000}, std::int64_t{1} << 40, std::int64_t{1} << 58}) {
    const GraphBudget b = node_budget(e);
    const auto s = static_cast<__int128>(b.s);
    CHECK(s * (s - 1) / 2 <= e);
    CHECK((s + 1) * s / 2 > e);
  }
}

TEST_CASE("isqrt is the integer floor of the square root") {
  for (std::int64_t n : {0, 1, 2, 3, 4, 15, 16, 17, 99, 100, 101}) {
    const auto r = isqrt(n);
    CHECK(r * r <= n);
    CHECK((r + 1) * (r + 1) > n);
  }
  const std::int64_t big = 3037000499;  // floor(sqrt(2^63 - 1))
  CHECK(isqrt(big * big) == big);
  CHECK(isqrt(big * big - 1) == big - 1);
}

TEST_CASE("empty region gives no graph") {
  std::mt19937_64 rng(1);
  const MovingRegion empty = segment_moving_region(test::zero_flow(8, 8), {4, 4}, 0.1);
  CHECK_FALSE(sample_graph(empty, {4, 4}, node_budget(10), {}, rng).has_value());
}

TEST_CASE("budget larger than the region takes the whole region") {
  std::mt19937_64 rng(2);
  const MovingRegion r = block_region(16, 16, 5, 5, 3, 1);
  REQUIRE(r.size() == 3);
  const auto g = sample_graph(r, {5, 5}, node_budget(1000), {}, rng);
  REQUIRE(g);
  CHECK(g->inside.size() == 3);
  CHECK(g->inside.front() == Pixel{5, 5});
  std::set<std::int64_t> got;
  for (Pixel p : g->inside) got.insert(ravel(p, 16));
  CHECK(got == std::set<std::int64_t>{ravel({5, 5}, 16), ravel({6, 5}, 16), ravel({7, 5}, 16)});
}

TEST_CASE("sampling invariants over many seeds") {
  const MovingRegion r = block_region(48, 40, 15, 12, 12, 9);
  const Pixel a{20, 16};
  const GraphBudget budget = node_budget(300);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const auto g = sample_graph(r, a, budget, {2, 0}, rng);
    REQUIRE(g);
    CHECK(g->inside.front() == a);
    CHECK(static_cast<std::int64_t>(g->inside.size()) == std::min<std::int64_t>(budget.s, static_cast<std::int64_t>(r.size())));
    CHECK(static_cast<std::int64_t>(g->outside.size()) <= budget.o);
    CHECK(g->outside_short == (static_cast<std::int64_t>(g->outside.size()) < budget.o));
    CHECK(g->draws <= 20 * budget.o);
    std::set<std::int64_t> in, out;
    for (Pixel p : g->inside) {
      CHECK(r.contains(p));
      in.insert(ravel(p, 48));
    }
    for (Pixel p : g->outside) {
      CHECK(in_frame(p, 48, 40));
      CHECK_FALSE(r.contains(p));
      out.insert(ravel(p, 48));
    }
    CHECK(in.size() == g->inside.size());
    CHECK(out.size() == g->outside.size());
    const auto k = static_cast<std::int64_t>(g->inside.size());
    CHECK(g->positive_edges() == k * (k - 1) / 2);
    CHECK(g->negative_edges() == k * static_cast<std::int64_t>(g->outside.size()));
  }
}

TEST_CASE("large budget covers the region exactly") {
  std::mt19937_64 rng(3);
  const MovingRegion r = block_region(20, 20, 4, 4, 5, 6);
  const auto g = sample_graph(r, {6, 7}, node_budget(10000), {}, rng);
  REQUIRE(g);
  std::vector<Pixel> inside = g->inside;
  std::sort(inside.begin(), inside.end(), [](Pixel a, Pixel b) { return ravel(a, 20) < ravel(b, 20); });
  CHECK(inside == r.coords);
}

TEST_CASE("equal seeds give equal graphs") {
  const MovingRegion r = block_region(32, 32, 10, 10, 8, 8);
  std::mt19937_64 r1(77), r2(77);
  const auto g1 = sample_graph(r, {12, 12}, node_budget(200), {3, 0}, r1);
  const auto g2 = sample_graph(r, {12, 12}, node_budget(200), {3, 0}, r2);
  CHECK(g1->inside == g2->inside);
  CHECK(g1->outside == g2->outside);
}

TEST_CASE("outside nodes spread further from the region as beta grows") {
  const MovingRegion r = block_region(64, 64, 31, 31, 3, 3);
  const Pixel a{32, 32};
  double previous = 0.0;
  for (int beta : {1, 3, 5}) {
    double total = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      std::mt19937_64 rng(seed);
      const auto g = sample_graph(r, a, node_budget(20), {beta, 0}, rng);
      for (Pixel p : g->outside) {
        total += distance_to_region(p, r);
        ++count;
      }
    }
    const double mean = total / count;
    CAPTURE(beta);
    CHECK(mean > previous);
    previous = mean;
  }
}

TEST_CASE("running out of draws flags a short outside set") {
  // the region fills most of the frame, so almost every draw is rejected
  const MovingRegion r = block_region(10, 10, 1, 1, 10, 9);
  std::mt19937_64 rng(4);
  const auto g = sample_graph(r, {5, 5}, node_budget(1000), {1, 3}, rng);
  REQUIRE(g);
  CHECK(g->draws == 3);
  CHECK(g->outside_short);
  CHECK(static_cast<std::int64_t>(g->outside.size()) < node_budget(1000).o);
}
