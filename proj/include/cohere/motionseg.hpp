#pragma once

#include "cohere/stream.hpp"
#include "cohere/types.hpp"

#include <cstdint>
#include <vector>

namespace cohere {

enum class Connectivity { four, eight };

/// Connected moving pixels grown from the attention point.
struct MovingRegion {
  int width = 0;
  int height = 0;
  std::vector<Pixel> coords;          // sorted by raveled index
  Field<std::uint8_t> member;         // h x w membership, 1 inside
  bool contains_attention = false;

  bool empty() const { return coords.empty(); }
  std::size_t size() const { return coords.size(); }
  bool contains(Pixel p) const { return in_frame(p, width, height) && member(p.y - 1, p.x - 1) != 0; }
};

/// Frontier expansion from `a` over neighbors whose flow magnitude exceeds
/// gamma. The seed is taken unconditionally; a lone seed is cleared.
MovingRegion segment_moving_region(const FlowField& flow, Pixel a, double gamma,
                                   Connectivity connectivity = Connectivity::four);

/// Same, on a precomputed magnitude field.
MovingRegion segment_moving_region(const FieldD& speed, Pixel a, double gamma,
                                   Connectivity connectivity = Connectivity::four);

}  // namespace cohere
