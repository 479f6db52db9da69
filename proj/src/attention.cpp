#include "cohere/attention.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>

namespace cohere {

void AttentionParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("attention: ") + what);
  };
  require(std::isfinite(alpha_b) && alpha_b >= 0, "alpha_b must be >= 0");
  require(std::isfinite(alpha_m) && alpha_m >= 0, "alpha_m must be >= 0");
  require(std::isfinite(rho) && rho > 0, "rho must be > 0");
  require(std::isfinite(nu) && nu > 0, "nu must be > 0");
  require(std::isfinite(dt) && dt > 0, "dt must be > 0");
  require(std::isfinite(eta) && eta >= 0, "inhibition_eta must be >= 0");
  require(std::isfinite(inhibition_radius) && inhibition_radius >= 0, "inhibition_radius must be >= 0");
  require(kappa >= 0 && kappa < 1, "inhibition_kappa must be in [0, 1)");
  require(std::isfinite(eps_phi) && eps_phi > 0, "eps_phi must be > 0");
}

FieldD gradient_magnitude(const FieldD& b) {
  const Eigen::Index h = b.rows(), w = b.cols();
  FieldD gx = FieldD::Zero(h, w), gy = FieldD::Zero(h, w);
  if (w >= 3) gx.middleCols(1, w - 2) = 0.5 * (b.rightCols(w - 2) - b.leftCols(w - 2));
  if (w >= 2) {
    gx.col(0) = b.col(1) - b.col(0);
    gx.col(w - 1) = b.col(w - 1) - b.col(w - 2);
  }
  if (h >= 3) gy.middleRows(1, h - 2) = 0.5 * (b.bottomRows(h - 2) - b.topRows(h - 2));
  if (h >= 2) {
    gy.row(0) = b.row(1) - b.row(0);
    gy.row(h - 1) = b.row(h - 1) - b.row(h - 2);
  }
  return (gx.square() + gy.square()).sqrt();
}

FieldD compute_masses(const Frame& frame, const FlowField& flow, const FieldD& inhibition, const AttentionParams& params) {
  const int h = frame.height(), w = frame.width();
  if (flow.vx.rows() != h || flow.vx.cols() != w) throw ShapeError("compute_masses: flow and frame sizes differ");
  FieldD mu = params.alpha_m * flow.magnitude();
  if (params.alpha_b != 0.0) mu += params.alpha_b * gradient_magnitude(brightness(frame));
  if (inhibition.size() != 0) {
    if (inhibition.rows() != h || inhibition.cols() != w) throw ShapeError("compute_masses: inhibition size differs");
    mu -= inhibition;
  }
  return mu.max(0.0);
}

AttentionState step_attention(const AttentionState& s, const FieldD& masses, const AttentionParams& p) {
  if (!s.position.allFinite() || !s.velocity.allFinite()) throw NumericError("step_attention: non-finite state");
  const Vec2 g = potential_gradient(masses, s.position, p.eps_phi);
  // g points toward the mass, so adding it attracts the gaze.
  AttentionState next;
  next.velocity = s.velocity + p.dt * (-p.rho * s.velocity + g);
  next.position = s.position + p.dt * next.velocity;
  const double hi[2] = {static_cast<double>(masses.cols()), static_cast<double>(masses.rows())};
  for (int k = 0; k < 2; ++k) {
    if (next.position[k] < 1.0) {
      next.position[k] = 1.0;
      next.velocity[k] = 0.0;
    } else if (next.position[k] > hi[k]) {
      next.position[k] = hi[k];
      next.velocity[k] = 0.0;
    }
  }
  if (!next.position.allFinite() || !next.velocity.allFinite()) throw NumericError("step_attention: non-finite state");
  next.saccade = next.velocity.norm() > p.nu;
  return next;
}

void update_inhibition(FieldD& inhibition, const Vec2& a, const AttentionParams& p) {
  inhibition *= p.kappa;
  if (p.eta == 0.0) return;
  const double r2 = p.inhibition_radius * p.inhibition_radius;
  for (Eigen::Index y = 0; y < inhibition.rows(); ++y) {
    for (Eigen::Index x = 0; x < inhibition.cols(); ++x) {
      const double dx = static_cast<double>(x + 1) - a.x(), dy = static_cast<double>(y + 1) - a.y();
      if (dx * dx + dy * dy <= r2) inhibition(y, x) += p.eta;
    }
  }
}

AttentionState default_initial_state(int width, int height) {
  return {Vec2(0.5 * (width + 1), 0.5 * (height + 1)), Vec2::Zero(), false};
}

std::vector<AttentionState> simulate_trajectory(const StreamBundle& bundle, const AttentionParams& params,
                                                const AttentionState& initial) {
  params.validate();
  const auto& m = bundle.manifest;
  std::vector<AttentionState> out;
  if (m.frame_count == 0) return out;
  out.reserve(static_cast<std::size_t>(m.frame_count));
  AttentionState first = initial;
  first.saccade = first.velocity.norm() > params.nu;
  out.push_back(first);
  FieldD inhibition = FieldD::Zero(m.height, m.width);
  update_inhibition(inhibition, first.position, params);
  for (int t = 1; t < m.frame_count; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const FieldD mu = compute_masses(bundle.frames[i], bundle.flows[i], inhibition, params);
    try {
      out.push_back(step_attention(out.back(), mu, params));
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at frame " + std::to_string(t));
    }
    update_inhibition(inhibition, out.back().position, params);
  }
  return out;
}

std::string format_foa(const std::vector<AttentionState>& trajectory) {
  std::string out;
  for (const auto& s : trajectory) {
    if (!s.position.allFinite() || !s.velocity.allFinite()) throw NumericError("write_foa: non-finite trajectory value");
    out += io::format_double(s.position.x()) + ',' + io::format_double(s.position.y()) + ',' +
           io::format_double(s.velocity.x()) + ',' + io::format_double(s.velocity.y()) + ',' + (s.saccade ? '1' : '0') +
           '\n';
  }
  return out;
}

std::vector<AttentionState> parse_foa(std::string_view text) {
  std::vector<AttentionState> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = "foa line " + std::to_string(line_no) + ": ";
    if (f.size() != 5) throw FormatError(where + "expected 5 fields, got " + std::to_string(f.size()));
    AttentionState s;
    try {
      s.position = Vec2(io::parse_double(f[0]), io::parse_double(f[1]));
      s.velocity = Vec2(io::parse_double(f[2]), io::parse_double(f[3]));
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
    if (f[4] == "1") {
      s.saccade = true;
    } else if (f[4] != "0") {
      throw FormatError(where + "saccade flag must be 0 or 1");
    }
    out.push_back(s);
  }
  return out;
}

void write_foa(const std::vector<AttentionState>& trajectory, const std::filesystem::path& path) {
  io::write_text_file(path, format_foa(trajectory));
}

std::vector<AttentionState> read_foa(const std::filesystem::path& path) {
  return parse_foa(io::read_text_file(path));
}

}  // namespace cohere
