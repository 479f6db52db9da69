#pragma once

#include "cohere/features.hpp"
#include "cohere/grad.hpp"
#include "cohere/types.hpp"

#include <string>
#include <vector>

namespace cohere {

struct LossWeights {
  double lambda_t = 1.0;
  double lambda_s = 1.0;
  double lambda_c = 1.0;
  double epsilon = 1e-3;  // keeps the reciprocal contrastive term bounded
  double alpha = 1e-3;    // learning rate
  bool normalized = true;

  void validate() const;
};

struct LossReport {
  double l_t = 0.0;
  double l_s = 0.0;
  double l_c = 0.0;
  double total = 0.0;
  int delta = 0;
  int inside = 0;
  int outside = 0;
};

/// CSV header matching LossReport rows.
inline constexpr const char* kLossCsvHeader = "t,l_t,l_s,l_c,total,delta,inside,outside";
std::string loss_csv_row(int t, const LossReport& report);

/// delta |f_now - f_prev|^2, or delta (1 - <f_now, f_prev>) when normalized.
/// f_prev is a constant snapshot. `f_now` is a [d] vector.
Var temporal_loss(Tape& tape, Var f_now, const Eigen::VectorXd& f_prev, bool delta, bool normalized);

/// Sum over unordered pairs of rows of `inside_rows` ([k, d]) of |f_x - f_z|^2,
/// or of 1 - <f_x, f_z> when normalized. Zero with fewer than two rows.
Var spatial_loss(Tape& tape, Var inside_rows, bool normalized);

/// 1 / (sum over inside x outside of |f_x - f_z|^2 + epsilon), or
/// sum of 1 + <f_x, f_z> when normalized. Zero when either side is empty.
Var contrastive_loss(Tape& tape, Var inside_rows, Var outside_rows, double epsilon, bool normalized);

/// Rows of a [w h, d] feature variable at the given 1-based pixels.
Var gather_pixels(Tape& tape, Var map, int width, int height, const std::vector<Pixel>& pixels);

/// lambda_t l_t + lambda_s l_s + lambda_c l_c; zero-weight terms are left out of the graph.
Var total_loss(Tape& tape, Var l_t, Var l_s, Var l_c, const LossWeights& weights);
double total_loss(double l_t, double l_s, double l_c, const LossWeights& weights);

/// w <- w - alpha g for every tensor. A non-finite gradient leaves the
/// weights untouched and returns false.
bool online_step(Weights& weights, const std::vector<Tensor>& grads, double alpha);

}  // namespace cohere
