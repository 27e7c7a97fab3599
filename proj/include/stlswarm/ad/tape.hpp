#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace stlswarm::ad {

class Tape;

// Handle into a Tape. Valid only for the tape that created it and only until
// that tape is reset.
struct Var {
  Tape* tape = nullptr;
  int node = -1;

  int rows() const;
  int cols() const;
  const Eigen::MatrixXd& value() const;
  // Zero matrix of the variable's shape when nothing has flowed back yet.
  Eigen::MatrixXd grad() const;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf with gradient storage. Constants are leaves whose grads are ignored.
  Var leaf(const Eigen::MatrixXd& value);
  Var leaf(double scalar);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var matmul(Var a, Var b);
  Var scale(Var a, double c);
  Var sum(Var a);   // 1x1
  Var relu(Var a);
  Var tanh(Var a);
  // (1/temp) * log sum_i exp(temp * x_i) along axis (0: over rows, result
  // 1 x cols; 1: over cols, result rows x 1). Computed in shifted form, so the
  // result is finite whenever the inputs are. temp may be negative, which
  // yields the soft minimum; temp must be nonzero.
  Var logsumexp(Var a, int axis, double temp);
  Var l2_norm(Var a);  // 1x1; gradient guarded at the origin
  // sum_i sqrt(x_i^2 + eps); smooth surrogate of the L1 norm, 1x1.
  Var l1_norm_smooth(Var a, double eps);
  Var concat(std::span<const Var> parts, int axis);
  Var slice(Var a, int row_begin, int row_count);  // all columns

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse insertion order.
  // loss must be 1x1. Gradients accumulate across calls until zero_grad or
  // reset.
  void backward(Var loss);
  void zero_grad();
  void reset();
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kAdd, kSub, kMul, kMatmul, kScale, kSum, kRelu, kTanh,
    kLogsumexp, kL2Norm, kL1NormSmooth, kConcat, kSlice,
  };

  struct Node {
    Op op;
    std::vector<int> parents;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;  // empty until something flows back
    double c0 = 0.0;       // scale factor / temp / eps
    int i0 = 0;            // axis / row_begin
  };

  int push(Node&& n);
  Var wrap(int idx) { return Var{this, idx}; }
  const Node& at(Var v) const;
  void check_same_tape(Var a, Var b) const;
  void accumulate(int idx, const Eigen::MatrixXd& g);

  std::vector<Node> nodes_;

  friend struct Var;
};

struct AdamState {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
  long step = 0;
};

// In-place Adam update. State matrices are sized to the parameter on first
// use.
void adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

}  // namespace stlswarm::ad
