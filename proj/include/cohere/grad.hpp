#pragma once

#include "cohere/types.hpp"

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cohere {

using Shape = std::vector<int>;

std::string to_string(const Shape& shape);

/// Dense row-major f64 array with an explicit shape. Scalars have shape {}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, Eigen::VectorXd data);

  static Tensor scalar(double v);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(int rows, int cols, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  Eigen::Index size() const { return data_.size(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  bool is_scalar() const { return data_.size() == 1 && shape_.empty(); }

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }
  double& operator[](Eigen::Index i) { return data_[i]; }
  double operator[](Eigen::Index i) const { return data_[i]; }
  double item() const;

  /// View as (shape[0], size / shape[0]) row-major matrix.
  Eigen::Map<RowMatrixXd> as_matrix();
  Eigen::Map<const RowMatrixXd> as_matrix() const;

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Eigen::VectorXd data_;
};

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class PairKind { squared_distance, dot };

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<Tensor> by_node) : by_node_(std::move(by_node)) {}

  /// Gradient of the loss with respect to a leaf; zeros when not reached.
  const Tensor& operator[](Var v) const { return by_node_.at(static_cast<std::size_t>(v.id)); }

 private:
  std::vector<Tensor> by_node_;
};

/// Records a forward computation and replays it backwards once.
///
/// Every op validates shapes (ShapeError naming the op and the shapes) and
/// rejects non-finite results (NumericError). Nodes whose inputs are all
/// constants keep no backward closure.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(Tensor value);
  Var constant(Tensor value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // input [H, W, Cin], kernel [K, K, Cin, Cout], bias [Cout] -> [H, W, Cout];
  // stride 1, zero padding (K - 1) / 2 on every side.
  Var conv2d(Var input, Var kernel, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var relu(Var a);
  Var tanh(Var a);
  Var square(Var a);
  Var reciprocal(Var a);
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var l2norm_rows(Var a);
  Var reshape(Var a, Shape shape);
  Var gather_rows(Var a, std::vector<std::int64_t> rows);
  /// Sum over unordered pairs i < j of the rows of `a`.
  Var pair_sum(Var a, PairKind kind);
  /// Sum over all (i, j) pairs of rows of `a` and rows of `b`.
  Var pair_sum(Var a, Var b, PairKind kind);

  /// Reverse sweep from a scalar loss. Allowed once per tape.
  Gradients backward(Var loss);

 private:
  using Backward = std::function<void(const Eigen::VectorXd& grad_out, std::vector<Eigen::VectorXd>& grads)>;

  struct Node {
    Tensor value;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<int> inputs;
    Backward backward;
  };

  Var push(const char* op, Tensor value, std::vector<int> inputs, Backward backward);
  const Node& node(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<bool> wants_;
  bool consumed_ = false;
};

struct FiniteDiffOptions {
  double h = 1e-5;
  /// Number of coordinates probed; 0 probes every coordinate.
  int probes = 0;
  std::uint64_t seed = 0;
};

/// Builds a scalar loss on the given tape from a parameter variable.
using ScalarGraph = std::function<Var(Tape&, Var)>;

/// Max over probed coordinates of |analytic - central difference| / max(1, |central difference|).
double finite_diff_check(const ScalarGraph& f, const Tensor& params, const FiniteDiffOptions& options = {});

}  // namespace cohere
