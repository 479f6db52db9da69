#include "cohere/grad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace cohere {

namespace {

Eigen::Index product(const Shape& shape) {
  Eigen::Index n = 1;
  for (int d : shape) n *= d;
  return n;
}

void check_shape(const Shape& shape) {
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor: non-positive dimension in shape " + to_string(shape));
  }
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

[[noreturn]] void bad_shape(const char* op, const Shape& a, const char* expected) {
  throw ShapeError(std::string(op) + ": shape " + to_string(a) + ", expected " + expected);
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_ = Eigen::VectorXd::Zero(product(shape_));
}

Tensor::Tensor(Shape shape, Eigen::VectorXd data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (product(shape_) != data_.size()) {
    throw ShapeError("tensor: shape " + to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                     " values");
  }
}

Tensor Tensor::scalar(double v) {
  Eigen::VectorXd d(1);
  d[0] = v;
  return Tensor({}, std::move(d));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), d.data());
  return Tensor({static_cast<int>(values.size())}, std::move(d));
}

Tensor Tensor::matrix(int rows, int cols, std::initializer_list<double> values) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), d.data());
  return Tensor({rows, cols}, std::move(d));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item: tensor of shape " + to_string(shape_) + " is not a scalar");
  return data_[0];
}

Eigen::Map<RowMatrixXd> Tensor::as_matrix() {
  const Eigen::Index rows = shape_.empty() ? 1 : shape_[0];
  return {data_.data(), rows, data_.size() / rows};
}

Eigen::Map<const RowMatrixXd> Tensor::as_matrix() const {
  const Eigen::Index rows = shape_.empty() ? 1 : shape_[0];
  return {data_.data(), rows, data_.size() / rows};
}

// ---------------------------------------------------------------------------

struct GradSink {
  std::vector<Eigen::VectorXd>& grads;
  const std::vector<bool>& wants_grad;

  bool wants(int id) const { return wants_grad[static_cast<std::size_t>(id)]; }

  template <typename Derived>
  void add(int id, const Eigen::MatrixBase<Derived>& g) {
    auto& slot = grads[static_cast<std::size_t>(id)];
    if (slot.size() == 0) {
      slot = g;
    } else {
      slot += g;
    }
  }
};

Var Tape::push(const char* op, Tensor value, std::vector<int> inputs, Backward backward) {
  if (!value.all_finite()) throw NumericError(std::string(op) + ": non-finite value produced");
  Node n;
  n.value = std::move(value);
  n.op = op;
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](int i) {
    return nodes_[static_cast<std::size_t>(i)].requires_grad;
  });
  if (n.requires_grad) n.backward = std::move(backward);
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v, const char* op) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw Error(std::string(op) + ": variable not recorded on this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::variable(Tensor value) {
  if (consumed_) throw Error("variable: tape already consumed by backward");
  if (!value.all_finite()) throw NumericError("variable: non-finite value");
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant: non-finite value");
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const { return node(v, "value").value; }

bool Tape::requires_grad(Var v) const { return node(v, "requires_grad").requires_grad; }

Var Tape::conv2d(Var input, Var kernel, Var bias) {
  const Tensor& x = node(input, "conv2d").value;
  const Tensor& k = node(kernel, "conv2d").value;
  const Tensor& b = node(bias, "conv2d").value;
  if (x.rank() != 3) bad_shape("conv2d", x.shape(), "[H,W,Cin]");
  if (k.rank() != 4 || k.shape()[0] != k.shape()[1] || k.shape()[0] % 2 == 0) {
    bad_shape("conv2d", k.shape(), "[K,K,Cin,Cout] with odd K");
  }
  if (k.shape()[2] != x.shape()[2]) shape_mismatch("conv2d", x.shape(), k.shape());
  if (b.rank() != 1 || b.shape()[0] != k.shape()[3]) shape_mismatch("conv2d", k.shape(), b.shape());

  const int H = x.shape()[0], W = x.shape()[1], C = x.shape()[2];
  const int K = k.shape()[0], Cout = k.shape()[3], pad = (K - 1) / 2;
  const Eigen::Index patch = static_cast<Eigen::Index>(K) * K * C;

  auto patches = std::make_shared<RowMatrixXd>(RowMatrixXd::Zero(static_cast<Eigen::Index>(H) * W, patch));
  const double* in = x.data().data();
  for (int y = 0; y < H; ++y) {
    for (int xx = 0; xx < W; ++xx) {
      double* dst = patches->row(static_cast<Eigen::Index>(y) * W + xx).data();
      for (int ky = 0; ky < K; ++ky) {
        const int iy = y + ky - pad;
        if (iy < 0 || iy >= H) continue;
        for (int kx = 0; kx < K; ++kx) {
          const int ix = xx + kx - pad;
          if (ix < 0 || ix >= W) continue;
          std::copy_n(in + (static_cast<Eigen::Index>(iy) * W + ix) * C, C, dst + (ky * K + kx) * C);
        }
      }
    }
  }

  Eigen::Map<const RowMatrixXd> wm(k.data().data(), patch, Cout);
  Tensor out({H, W, Cout});
  Eigen::Map<RowMatrixXd> out_rows(out.data().data(), static_cast<Eigen::Index>(H) * W, Cout);
  out_rows.noalias() = (*patches) * wm;
  out_rows.rowwise() += b.data().transpose();

  const int ix_id = input.id, k_id = kernel.id, b_id = bias.id;
  const auto kernel_index = static_cast<std::size_t>(kernel.id);
  return push("conv2d", std::move(out), {ix_id, k_id, b_id},
              [this, patches, ix_id, k_id, b_id, H, W, C, K, Cout, pad, patch,
               kernel_index](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                const auto& nodes = nodes_;
                Eigen::Map<const RowMatrixXd> gm(g.data(), static_cast<Eigen::Index>(H) * W, Cout);
                GradSink sink{grads, wants_};
                if (sink.wants(k_id)) {
                  RowMatrixXd dw = patches->transpose() * gm;
                  sink.add(k_id, Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size()));
                }
                if (sink.wants(b_id)) sink.add(b_id, gm.colwise().sum().transpose());
                if (sink.wants(ix_id)) {
                  Eigen::Map<const RowMatrixXd> wm2(nodes[kernel_index].value.data().data(), patch, Cout);
                  RowMatrixXd dp = gm * wm2.transpose();
                  Eigen::VectorXd dx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H) * W * C);
                  for (int y = 0; y < H; ++y) {
                    for (int xx = 0; xx < W; ++xx) {
                      const double* src = dp.row(static_cast<Eigen::Index>(y) * W + xx).data();
                      for (int ky = 0; ky < K; ++ky) {
                        const int iy = y + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < K; ++kx) {
                          const int ixx = xx + kx - pad;
                          if (ixx < 0 || ixx >= W) continue;
                          double* d = dx.data() + (static_cast<Eigen::Index>(iy) * W + ixx) * C;
                          const double* s = src + (ky * K + kx) * C;
                          for (int c = 0; c < C; ++c) d[c] += s[c];
                        }
                      }
                    }
                  }
                  sink.add(ix_id, dx);
                }
              });
}

Var Tape::add(Var a, Var b) {
  const Tensor& x = node(a, "add").value;
  const Tensor& y = node(b, "add").value;
  if (x.shape() != y.shape()) shape_mismatch("add", x.shape(), y.shape());
  Tensor out(x.shape(), x.data() + y.data());
  const int ia = a.id, ib = b.id;
  return push("add", std::move(out), {ia, ib}, [this, ia, ib](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink sink{grads, wants_};
    if (sink.wants(ia)) sink.add(ia, g);
    if (sink.wants(ib)) sink.add(ib, g);
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& x = node(a, "sub").value;
  const Tensor& y = node(b, "sub").value;
  if (x.shape() != y.shape()) shape_mismatch("sub", x.shape(), y.shape());
  Tensor out(x.shape(), x.data() - y.data());
  const int ia = a.id, ib = b.id;
  return push("sub", std::move(out), {ia, ib}, [this, ia, ib](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink sink{grads, wants_};
    if (sink.wants(ia)) sink.add(ia, g);
    if (sink.wants(ib)) sink.add(ib, -g);
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& x = node(a, "mul").value;
  const Tensor& y = node(b, "mul").value;
  if (x.shape() != y.shape()) shape_mismatch("mul", x.shape(), y.shape());
  Tensor out(x.shape(), x.data().cwiseProduct(y.data()));
  const int ia = a.id, ib = b.id;
  return push("mul", std::move(out), {ia, ib}, [this, ia, ib](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink sink{grads, wants_};
    if (sink.wants(ia)) sink.add(ia, g.cwiseProduct(nodes_[static_cast<std::size_t>(ib)].value.data()));
    if (sink.wants(ib)) sink.add(ib, g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].value.data()));
  });
}

Var Tape::scale(Var a, double factor) {
  const Tensor& x = node(a, "scale").value;
  Tensor out(x.shape(), x.data() * factor);
  const int ia = a.id;
  return push("scale", std::move(out), {ia}, [this, ia, factor](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink{grads, wants_}.add(ia, g * factor);
  });
}

Var Tape::add_scalar(Var a, double offset) {
  const Tensor& x = node(a, "add_scalar").value;
  Tensor out(x.shape(), x.data().array() + offset);
  const int ia = a.id;
  return push("add_scalar", std::move(out), {ia}, [this, ia](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink{grads, wants_}.add(ia, g);
  });
}

Var Tape::relu(Var a) {
  const Tensor& x = node(a, "relu").value;
  Tensor out(x.shape(), x.data().cwiseMax(0.0));
  const int ia = a.id;
  return push("relu", std::move(out), {ia}, [this, ia](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    const auto& xv = nodes_[static_cast<std::size_t>(ia)].value.data();
    GradSink{grads, wants_}.add(ia, (xv.array() > 0.0).select(g, 0.0).matrix());
  });
}

Var Tape::tanh(Var a) {
  const Tensor& x = node(a, "tanh").value;
  Tensor out(x.shape(), x.data().array().tanh().matrix());
  const int ia = a.id;
  const int out_id = static_cast<int>(nodes_.size());
  return push("tanh", std::move(out), {ia}, [this, ia, out_id](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    const auto& yv = nodes_[static_cast<std::size_t>(out_id)].value.data();
    GradSink{grads, wants_}.add(ia, g.cwiseProduct((1.0 - yv.array().square()).matrix()));
  });
}

Var Tape::square(Var a) {
  const Tensor& x = node(a, "square").value;
  Tensor out(x.shape(), x.data().array().square().matrix());
  const int ia = a.id;
  return push("square", std::move(out), {ia}, [this, ia](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    const auto& xv = nodes_[static_cast<std::size_t>(ia)].value.data();
    GradSink{grads, wants_}.add(ia, 2.0 * g.cwiseProduct(xv));
  });
}

Var Tape::reciprocal(Var a) {
  const Tensor& x = node(a, "reciprocal").value;
  if ((x.data().array() == 0.0).any()) throw NumericError("reciprocal: division by zero");
  Tensor out(x.shape(), x.data().array().inverse().matrix());
  const int ia = a.id;
  const int out_id = static_cast<int>(nodes_.size());
  return push("reciprocal", std::move(out), {ia}, [this, ia, out_id](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    const auto& yv = nodes_[static_cast<std::size_t>(out_id)].value.data();
    GradSink{grads, wants_}.add(ia, -g.cwiseProduct(yv.cwiseProduct(yv)));
  });
}

Var Tape::sum(Var a) {
  const Tensor& x = node(a, "sum").value;
  const Eigen::Index n = x.size();
  const int ia = a.id;
  return push("sum", Tensor::scalar(x.data().sum()), {ia}, [this, ia, n](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
    GradSink{grads, wants_}.add(ia, Eigen::VectorXd::Constant(n, g[0]));
  });
}

Var Tape::dot(Var a, Var b) {
  const Tensor& x = node(a, "dot").value;
  const Tensor& y = node(b, "dot").value;
  if (x.size() != y.size()) shape_mismatch("dot", x.shape(), y.shape());
  const int ia = a.id, ib = b.id;
  return push("dot", Tensor::scalar(x.data().dot(y.data())), {ia, ib},
              [this, ia, ib](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                GradSink sink{grads, wants_};
                if (sink.wants(ia)) sink.add(ia, g[0] * nodes_[static_cast<std::size_t>(ib)].value.data());
                if (sink.wants(ib)) sink.add(ib, g[0] * nodes_[static_cast<std::size_t>(ia)].value.data());
              });
}

Var Tape::l2norm_rows(Var a) {
  const Tensor& x = node(a, "l2norm_rows").value;
  if (x.rank() != 2) bad_shape("l2norm_rows", x.shape(), "[N,D]");
  Tensor out(x.shape());
  auto xm = x.as_matrix();
  auto om = out.as_matrix();
  Eigen::VectorXd norms = xm.rowwise().norm();
  for (Eigen::Index i = 0; i < xm.rows(); ++i) {
    if (norms[i] > 0.0) om.row(i) = xm.row(i) / norms[i];
  }
  const int ia = a.id;
  const int out_id = static_cast<int>(nodes_.size());
  return push("l2norm_rows", std::move(out), {ia},
              [this, ia, out_id, norms](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                const Tensor& y = nodes_[static_cast<std::size_t>(out_id)].value;
                auto ym = y.as_matrix();
                Eigen::Map<const RowMatrixXd> gm(g.data(), ym.rows(), ym.cols());
                RowMatrixXd dx = RowMatrixXd::Zero(ym.rows(), ym.cols());
                for (Eigen::Index i = 0; i < ym.rows(); ++i) {
                  if (norms[i] == 0.0) continue;
                  const double proj = ym.row(i).dot(gm.row(i));
                  dx.row(i) = (gm.row(i) - proj * ym.row(i)) / norms[i];
                }
                GradSink{grads, wants_}.add(ia, Eigen::Map<const Eigen::VectorXd>(dx.data(), dx.size()));
              });
}

Var Tape::reshape(Var a, Shape shape) {
  const Tensor& x = node(a, "reshape").value;
  check_shape(shape);
  if (product(shape) != x.size()) shape_mismatch("reshape", x.shape(), shape);
  const int ia = a.id;
  return push("reshape", Tensor(std::move(shape), x.data()), {ia},
              [this, ia](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) { GradSink{grads, wants_}.add(ia, g); });
}

Var Tape::gather_rows(Var a, std::vector<std::int64_t> rows) {
  const Tensor& x = node(a, "gather_rows").value;
  if (x.rank() != 2) bad_shape("gather_rows", x.shape(), "[N,D]");
  if (rows.empty()) throw ShapeError("gather_rows: empty row selection");
  const Eigen::Index n = x.shape()[0], d = x.shape()[1];
  for (auto r : rows) {
    if (r < 0 || r >= n) {
      throw BoundsError("gather_rows: row " + std::to_string(r) + " outside [0," + std::to_string(n) + ")");
    }
  }
  Tensor out({static_cast<int>(rows.size()), static_cast<int>(d)});
  auto xm = x.as_matrix();
  auto om = out.as_matrix();
  for (std::size_t i = 0; i < rows.size(); ++i) om.row(static_cast<Eigen::Index>(i)) = xm.row(rows[i]);
  const int ia = a.id;
  return push("gather_rows", std::move(out), {ia},
              [this, ia, rows = std::move(rows), n, d](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                RowMatrixXd dx = RowMatrixXd::Zero(n, d);
                Eigen::Map<const RowMatrixXd> gm(g.data(), static_cast<Eigen::Index>(rows.size()), d);
                for (std::size_t i = 0; i < rows.size(); ++i) dx.row(rows[i]) += gm.row(static_cast<Eigen::Index>(i));
                GradSink{grads, wants_}.add(ia, Eigen::Map<const Eigen::VectorXd>(dx.data(), dx.size()));
              });
}

namespace {

inline double pair_term(const double* a, const double* b, Eigen::Index d, PairKind kind) {
  double s = 0.0;
  if (kind == PairKind::squared_distance) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double diff = a[k] - b[k];
      s += diff * diff;
    }
  } else {
    for (Eigen::Index k = 0; k < d; ++k) s += a[k] * b[k];
  }
  return s;
}

// d/da of the pair term, scaled by g and accumulated into out.
inline void pair_grad(const double* a, const double* b, Eigen::Index d, PairKind kind, double g, double* out) {
  if (kind == PairKind::squared_distance) {
    for (Eigen::Index k = 0; k < d; ++k) out[k] += 2.0 * g * (a[k] - b[k]);
  } else {
    for (Eigen::Index k = 0; k < d; ++k) out[k] += g * b[k];
  }
}

}  // namespace

Var Tape::pair_sum(Var a, PairKind kind) {
  const Tensor& x = node(a, "pair_sum").value;
  if (x.rank() != 2) bad_shape("pair_sum", x.shape(), "[N,D]");
  const Eigen::Index n = x.shape()[0], d = x.shape()[1];
  const double* p = x.data().data();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) s += pair_term(p + i * d, p + j * d, d, kind);
  }
  const int ia = a.id;
  return push("pair_sum", Tensor::scalar(s), {ia},
              [this, ia, n, d, kind](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                const double* p2 = nodes_[static_cast<std::size_t>(ia)].value.data().data();
                Eigen::VectorXd dx = Eigen::VectorXd::Zero(n * d);
                for (Eigen::Index i = 0; i < n; ++i) {
                  for (Eigen::Index j = i + 1; j < n; ++j) {
                    pair_grad(p2 + i * d, p2 + j * d, d, kind, g[0], dx.data() + i * d);
                    pair_grad(p2 + j * d, p2 + i * d, d, kind, g[0], dx.data() + j * d);
                  }
                }
                GradSink{grads, wants_}.add(ia, dx);
              });
}

Var Tape::pair_sum(Var a, Var b, PairKind kind) {
  const Tensor& x = node(a, "pair_sum").value;
  const Tensor& y = node(b, "pair_sum").value;
  if (x.rank() != 2 || y.rank() != 2 || x.shape()[1] != y.shape()[1]) shape_mismatch("pair_sum", x.shape(), y.shape());
  const Eigen::Index n = x.shape()[0], m = y.shape()[0], d = x.shape()[1];
  const double* p = x.data().data();
  const double* q = y.data().data();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) s += pair_term(p + i * d, q + j * d, d, kind);
  }
  const int ia = a.id, ib = b.id;
  return push("pair_sum", Tensor::scalar(s), {ia, ib},
              [this, ia, ib, n, m, d, kind](const Eigen::VectorXd& g, std::vector<Eigen::VectorXd>& grads) {
                GradSink sink{grads, wants_};
                const double* p2 = nodes_[static_cast<std::size_t>(ia)].value.data().data();
                const double* q2 = nodes_[static_cast<std::size_t>(ib)].value.data().data();
                if (sink.wants(ia)) {
                  Eigen::VectorXd dx = Eigen::VectorXd::Zero(n * d);
                  for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = 0; j < m; ++j) pair_grad(p2 + i * d, q2 + j * d, d, kind, g[0], dx.data() + i * d);
                  }
                  sink.add(ia, dx);
                }
                if (sink.wants(ib)) {
                  Eigen::VectorXd dy = Eigen::VectorXd::Zero(m * d);
                  for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = 0; j < m; ++j) pair_grad(q2 + j * d, p2 + i * d, d, kind, g[0], dy.data() + j * d);
                  }
                  sink.add(ib, dy);
                }
              });
}

Gradients Tape::backward(Var loss) {
  if (consumed_) throw Error("backward: tape already consumed");
  const Node& l = node(loss, "backward");
  if (l.value.size() != 1) throw ShapeError("backward: loss must be scalar, got shape " + to_string(l.value.shape()));
  consumed_ = true;

  wants_.assign(nodes_.size(), false);
  for (std::size_t i = 0; i < nodes_.size(); ++i) wants_[i] = nodes_[i].requires_grad;

  std::vector<Eigen::VectorXd> grads(nodes_.size());
  grads[static_cast<std::size_t>(loss.id)] = Eigen::VectorXd::Ones(1);
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    auto& g = grads[static_cast<std::size_t>(i)];
    if (g.size() == 0 || !n.backward) continue;
    n.backward(g, grads);
    if (!n.inputs.empty()) g.resize(0);
  }

  std::vector<Tensor> out(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!n.requires_grad || !n.inputs.empty()) continue;
    if (grads[i].size() == 0) {
      out[i] = Tensor(n.value.shape());
    } else {
      out[i] = Tensor(n.value.shape(), std::move(grads[i]));
      if (!out[i].all_finite()) throw NumericError("backward: non-finite gradient");
    }
  }
  for (auto& n : nodes_) n.backward = nullptr;
  return Gradients(std::move(out));
}

// ---------------------------------------------------------------------------

double finite_diff_check(const ScalarGraph& f, const Tensor& params, const FiniteDiffOptions& options) {
  if (!(options.h > 0.0)) throw ValidationError("finite_diff_check: h must be > 0");

  Tensor analytic;
  {
    Tape tape;
    Var p = tape.variable(params);
    Var loss = f(tape, p);
    analytic = tape.backward(loss)[p];
  }

  auto evaluate = [&](const Tensor& at, Eigen::Index coord) {
    try {
      Tape tape;
      Var p = tape.constant(at);
      const double v = tape.value(f(tape, p)).item();
      if (!std::isfinite(v)) throw NumericError("non-finite");
      return v;
    } catch (const NumericError& e) {
      throw NumericError("finite_diff_check: non-finite loss at perturbed coordinate " + std::to_string(coord) + " (" +
                         e.what() + ")");
    }
  };

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(params.size()));
  std::iota(coords.begin(), coords.end(), Eigen::Index{0});
  if (options.probes > 0 && static_cast<std::size_t>(options.probes) < coords.size()) {
    std::mt19937_64 rng(options.seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(options.probes); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(static_cast<std::size_t>(options.probes));
  }

  double worst = 0.0;
  for (Eigen::Index c : coords) {
    Tensor plus = params, minus = params;
    plus[c] += options.h;
    minus[c] -= options.h;
    const double fd = (evaluate(plus, c) - evaluate(minus, c)) / (2.0 * options.h);
    worst = std::max(worst, std::abs(analytic[c] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace cohere
