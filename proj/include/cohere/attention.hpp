#pragma once

#include "cohere/stream.hpp"
#include "cohere/types.hpp"

#include <filesystem>
#include <numbers>
#include <vector>

namespace cohere {

struct AttentionParams {
  double alpha_b = 1.0;  // brightness-gradient mass weight
  double alpha_m = 1.0;  // motion mass weight
  double rho = 0.5;      // dissipation
  double nu = 5.0;       // saccade speed threshold, px/step
  double dt = 1.0;
  double eta = 0.0;      // inhibition deposit per step
  double inhibition_radius = 3.0;
  double kappa = 0.9;    // inhibition decay factor per step
  double eps_phi = 0.25;  // px^2 floor on squared distance in the potential sum

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct AttentionState {
  Vec2 position{1.0, 1.0};
  Vec2 velocity{0.0, 0.0};
  bool saccade = false;

  friend bool operator==(const AttentionState&, const AttentionState&) = default;
};

/// alpha_b |grad brightness| + alpha_m |v| - inhibition, clamped at zero.
/// `inhibition` may be empty (no inhibition).
FieldD compute_masses(const Frame& frame, const FlowField& flow, const FieldD& inhibition, const AttentionParams& params);

/// Gradient magnitude by central differences, one-sided at the borders.
FieldD gradient_magnitude(const FieldD& field);

/// Discretized gradient of the log potential generated by `masses` at `x`:
///   -(1/2pi) sum_z mu(z) (x - z) / max(|x - z|^2, eps_phi)
/// over pixel centers z (1-based). It points toward the mass.
template <typename Derived>
Point2<typename Derived::Scalar> potential_gradient(const Eigen::ArrayBase<Derived>& masses,
                                                    const Point2<typename Derived::Scalar>& x,
                                                    typename Derived::Scalar eps_phi) {
  using Scalar = typename Derived::Scalar;
  Scalar gx = 0, gy = 0;
  for (Eigen::Index r = 0; r < masses.rows(); ++r) {
    const Scalar dy = x.y() - static_cast<Scalar>(r + 1);
    for (Eigen::Index c = 0; c < masses.cols(); ++c) {
      const Scalar mu = masses(r, c);
      if (mu == Scalar(0)) continue;
      const Scalar dx = x.x() - static_cast<Scalar>(c + 1);
      const Scalar w = mu / std::max(dx * dx + dy * dy, eps_phi);
      gx += w * dx;
      gy += w * dy;
    }
  }
  const Scalar k = Scalar(-1) / (Scalar(2) * std::numbers::pi_v<Scalar>);
  return {k * gx, k * gy};
}

/// One semi-implicit Euler step of the damped gravitational dynamics, then a
/// clamp to [1, w] x [1, h] that zeroes the velocity component normal to a
/// violated border. saccade = |velocity| > nu.
AttentionState step_attention(const AttentionState& state, const FieldD& masses, const AttentionParams& params);

/// Geometric decay by kappa, then a disk deposit of eta around `a`.
void update_inhibition(FieldD& inhibition, const Vec2& a, const AttentionParams& params);

/// Frame center, at rest.
AttentionState default_initial_state(int width, int height);

/// Entry t is the attention at frame t. Entry 0 is `initial` (flagged by
/// speed); entry t >= 1 steps from t - 1 under the masses of frame t.
std::vector<AttentionState> simulate_trajectory(const StreamBundle& bundle, const AttentionParams& params,
                                                const AttentionState& initial);

/// CSV, one line per frame: foa_x,foa_y,v_x,v_y,saccade.
void write_foa(const std::vector<AttentionState>& trajectory, const std::filesystem::path& path);
std::vector<AttentionState> read_foa(const std::filesystem::path& path);
std::string format_foa(const std::vector<AttentionState>& trajectory);
std::vector<AttentionState> parse_foa(std::string_view text);

}  // namespace cohere
