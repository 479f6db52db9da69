#include "cohere/objective.hpp"

#include "binary_io.hpp"

#include <cmath>

namespace cohere {

void LossWeights::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("loss: ") + what);
  };
  require(std::isfinite(lambda_t) && lambda_t >= 0, "lambda_t must be >= 0");
  require(std::isfinite(lambda_s) && lambda_s >= 0, "lambda_s must be >= 0");
  require(std::isfinite(lambda_c) && lambda_c >= 0, "lambda_c must be >= 0");
  require(std::isfinite(epsilon) && epsilon > 0, "epsilon must be > 0");
  require(std::isfinite(alpha) && alpha > 0, "alpha must be > 0");
}

std::string loss_csv_row(int t, const LossReport& r) {
  return std::to_string(t) + ',' + io::format_double(r.l_t) + ',' + io::format_double(r.l_s) + ',' +
         io::format_double(r.l_c) + ',' + io::format_double(r.total) + ',' + std::to_string(r.delta) + ',' +
         std::to_string(r.inside) + ',' + std::to_string(r.outside);
}

Var temporal_loss(Tape& tape, Var f_now, const Eigen::VectorXd& f_prev, bool delta, bool normalized) {
  const Tensor& now = tape.value(f_now);
  if (now.rank() != 1 || now.size() != f_prev.size()) {
    throw ShapeError("temporal_loss: f_now " + to_string(now.shape()) + " vs f_prev of " +
                     std::to_string(f_prev.size()) + " values");
  }
  if (!delta) return tape.constant(Tensor::scalar(0.0));
  const Var prev = tape.constant(Tensor({static_cast<int>(f_prev.size())}, f_prev));
  if (normalized) return tape.add_scalar(tape.scale(tape.dot(f_now, prev), -1.0), 1.0);
  return tape.sum(tape.square(tape.sub(f_now, prev)));
}

Var spatial_loss(Tape& tape, Var inside_rows, bool normalized) {
  const Tensor& v = tape.value(inside_rows);
  if (v.rank() != 2) throw ShapeError("spatial_loss: expected [k, d] rows, got " + to_string(v.shape()));
  const auto k = static_cast<double>(v.shape()[0]);
  if (k < 2) return tape.constant(Tensor::scalar(0.0));
  if (normalized) {
    const double pairs = k * (k - 1) / 2;
    return tape.add_scalar(tape.scale(tape.pair_sum(inside_rows, PairKind::dot), -1.0), pairs);
  }
  return tape.pair_sum(inside_rows, PairKind::squared_distance);
}

Var contrastive_loss(Tape& tape, Var inside_rows, Var outside_rows, double epsilon, bool normalized) {
  if (!(epsilon > 0)) throw ValidationError("contrastive_loss: epsilon must be > 0");
  const Tensor& a = tape.value(inside_rows);
  const Tensor& b = tape.value(outside_rows);
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[1]) {
    throw ShapeError("contrastive_loss: rows " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  if (a.shape()[0] == 0 || b.shape()[0] == 0) return tape.constant(Tensor::scalar(0.0));
  if (normalized) {
    const double pairs = static_cast<double>(a.shape()[0]) * b.shape()[0];
    return tape.add_scalar(tape.pair_sum(inside_rows, outside_rows, PairKind::dot), pairs);
  }
  return tape.reciprocal(tape.add_scalar(tape.pair_sum(inside_rows, outside_rows, PairKind::squared_distance), epsilon));
}

Var gather_pixels(Tape& tape, Var map, int width, int height, const std::vector<Pixel>& pixels) {
  std::vector<std::int64_t> rows;
  rows.reserve(pixels.size());
  for (const Pixel& p : pixels) {
    if (!in_frame(p, width, height)) {
      throw BoundsError("gather_pixels: (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") outside the map");
    }
    rows.push_back(ravel(p, width));
  }
  return tape.gather_rows(map, std::move(rows));
}

Var total_loss(Tape& tape, Var l_t, Var l_s, Var l_c, const LossWeights& w) {
  Var total = tape.constant(Tensor::scalar(0.0));
  if (w.lambda_t != 0.0) total = tape.add(total, tape.scale(l_t, w.lambda_t));
  if (w.lambda_s != 0.0) total = tape.add(total, tape.scale(l_s, w.lambda_s));
  if (w.lambda_c != 0.0) total = tape.add(total, tape.scale(l_c, w.lambda_c));
  return total;
}

double total_loss(double l_t, double l_s, double l_c, const LossWeights& w) {
  return w.lambda_t * l_t + w.lambda_s * l_s + w.lambda_c * l_c;
}

bool online_step(Weights& weights, const std::vector<Tensor>& grads, double alpha) {
  if (grads.size() != weights.tensors.size()) {
    throw ShapeError("online_step: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(weights.tensors.size()) + " tensors");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != weights.tensors[i].shape()) {
      throw ShapeError("online_step: gradient " + to_string(grads[i].shape()) + " vs weight " +
                       to_string(weights.tensors[i].shape()));
    }
    if (!grads[i].all_finite()) return false;
  }
  for (std::size_t i = 0; i < grads.size(); ++i) weights.tensors[i].data() -= alpha * grads[i].data();
  ++weights.version;
  return true;
}

}  // namespace cohere
