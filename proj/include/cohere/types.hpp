#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohere {

// Dense 2D fields are row-major with rows = image height, matching raveled
// pixel indices (y - 1) * w + (x - 1).
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FieldF = Field<float>;
using FieldD = Field<double>;
using Mask = Field<std::uint16_t>;

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2 = Point2<double>;

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Integer frame coordinate, 1-based on both axes: x in [1, w], y in [1, h].
struct Pixel {
  int x = 1;
  int y = 1;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline bool in_frame(Pixel p, int width, int height) {
  return p.x >= 1 && p.x <= width && p.y >= 1 && p.y <= height;
}

inline std::int64_t ravel(Pixel p, int width) {
  return static_cast<std::int64_t>(p.y - 1) * width + (p.x - 1);
}

inline Pixel unravel(std::int64_t index, int width) {
  return {static_cast<int>(index % width) + 1, static_cast<int>(index / width) + 1};
}

/// Nearest pixel to a continuous position (pixel centers sit on integers).
inline Pixel round_to_pixel(const Vec2& a, int width, int height) {
  auto clampi = [](long v, int lo, int hi) { return static_cast<int>(v < lo ? lo : (v > hi ? hi : v)); };
  return {clampi(std::lround(a.x()), 1, width), clampi(std::lround(a.y()), 1, height)};
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cohere
