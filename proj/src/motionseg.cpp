#include "cohere/motionseg.hpp"

#include <algorithm>
#include <string>

namespace cohere {

MovingRegion segment_moving_region(const FlowField& flow, Pixel a, double gamma, Connectivity connectivity) {
  return segment_moving_region(flow.magnitude(), a, gamma, connectivity);
}

MovingRegion segment_moving_region(const FieldD& speed, Pixel a, double gamma, Connectivity connectivity) {
  const int w = static_cast<int>(speed.cols()), h = static_cast<int>(speed.rows());
  if (!(gamma > 0)) throw ValidationError("segment_moving_region: gamma must be > 0");
  if (!in_frame(a, w, h)) {
    throw BoundsError("segment_moving_region: attention (" + std::to_string(a.x) + "," + std::to_string(a.y) +
                      ") outside " + std::to_string(w) + "x" + std::to_string(h));
  }

  static constexpr int dx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int degree = connectivity == Connectivity::four ? 4 : 8;

  MovingRegion region;
  region.width = w;
  region.height = h;
  region.member = Field<std::uint8_t>::Zero(h, w);
  region.member(a.y - 1, a.x - 1) = 1;
  std::vector<Pixel> frontier{a};
  std::vector<Pixel> found{a};
  while (!frontier.empty()) {
    const Pixel x = frontier.back();
    frontier.pop_back();
    for (int k = 0; k < degree; ++k) {
      const Pixel n{x.x + dx8[k], x.y + dy8[k]};
      if (!in_frame(n, w, h) || region.member(n.y - 1, n.x - 1)) continue;
      if (!(speed(n.y - 1, n.x - 1) > gamma)) continue;
      region.member(n.y - 1, n.x - 1) = 1;
      frontier.push_back(n);
      found.push_back(n);
    }
  }

  if (found.size() == 1) {
    region.member(a.y - 1, a.x - 1) = 0;
    return region;
  }
  std::sort(found.begin(), found.end(), [w](Pixel p, Pixel q) { return ravel(p, w) < ravel(q, w); });
  region.coords = std::move(found);
  region.contains_attention = true;
  return region;
}

}  // namespace cohere
