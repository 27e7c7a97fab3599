#include "stlswarm/ad/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace stlswarm::ad {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string("non-finite values in ") + what);
  }
}

}  // namespace

int Var::rows() const { return value().rows(); }
int Var::cols() const { return value().cols(); }

const Eigen::MatrixXd& Var::value() const {
  require(tape != nullptr && node >= 0, "Var is not bound to a tape");
  return tape->nodes_[node].value;
}

Eigen::MatrixXd Var::grad() const {
  require(tape != nullptr && node >= 0, "Var is not bound to a tape");
  const auto& n = tape->nodes_[node];
  if (n.grad.size() == 0) return Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

int Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::at(Var v) const {
  require(v.tape == this, "Var belongs to a different tape");
  require(v.node >= 0 && v.node < static_cast<int>(nodes_.size()),
          "Var index out of range");
  return nodes_[v.node];
}

void Tape::check_same_tape(Var a, Var b) const {
  require(a.tape == this && b.tape == this, "operands from different tapes");
}

Var Tape::leaf(const Eigen::MatrixXd& value) {
  require_finite(value, "leaf");
  return wrap(push({Op::kLeaf, {}, value, {}}));
}

Var Tape::leaf(double scalar) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = scalar;
  return leaf(m);
}

Var Tape::add(Var a, Var b) {
  check_same_tape(a, b);
  require(at(a).value.rows() == at(b).value.rows() &&
              at(a).value.cols() == at(b).value.cols(),
          "add: shape mismatch");
  return wrap(push({Op::kAdd, {a.node, b.node}, at(a).value + at(b).value, {}}));
}

Var Tape::sub(Var a, Var b) {
  check_same_tape(a, b);
  require(at(a).value.rows() == at(b).value.rows() &&
              at(a).value.cols() == at(b).value.cols(),
          "sub: shape mismatch");
  return wrap(push({Op::kSub, {a.node, b.node}, at(a).value - at(b).value, {}}));
}

Var Tape::mul(Var a, Var b) {
  check_same_tape(a, b);
  require(at(a).value.rows() == at(b).value.rows() &&
              at(a).value.cols() == at(b).value.cols(),
          "mul: shape mismatch");
  return wrap(push({Op::kMul, {a.node, b.node},
                    at(a).value.cwiseProduct(at(b).value), {}}));
}

Var Tape::matmul(Var a, Var b) {
  check_same_tape(a, b);
  require(at(a).value.cols() == at(b).value.rows(), "matmul: inner dim mismatch");
  return wrap(push({Op::kMatmul, {a.node, b.node}, at(a).value * at(b).value, {}}));
}

Var Tape::scale(Var a, double c) {
  require(std::isfinite(c), "scale: non-finite factor");
  Node n{Op::kScale, {a.node}, at(a).value * c, {}};
  n.c0 = c;
  return wrap(push(std::move(n)));
}

Var Tape::sum(Var a) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = at(a).value.sum();
  return wrap(push({Op::kSum, {a.node}, m, {}}));
}

Var Tape::relu(Var a) {
  return wrap(push({Op::kRelu, {a.node}, at(a).value.cwiseMax(0.0), {}}));
}

Var Tape::tanh(Var a) {
  return wrap(push({Op::kTanh, {a.node},
                    at(a).value.array().tanh().matrix(), {}}));
}

Var Tape::logsumexp(Var a, int axis, double temp) {
  require(axis == 0 || axis == 1, "logsumexp: axis must be 0 or 1");
  require(temp != 0.0 && std::isfinite(temp), "logsumexp: temp must be finite and nonzero");
  const Eigen::MatrixXd& x = at(a).value;
  require(x.size() > 0, "logsumexp: empty input");
  Eigen::MatrixXd out;
  // Shift by the per-slice extremum of temp*x so every exponent is <= 0.
  if (axis == 0) {
    out.resize(1, x.cols());
    for (int j = 0; j < x.cols(); ++j) {
      const Eigen::ArrayXd tx = temp * x.col(j).array();
      const double m = tx.maxCoeff();
      out(0, j) = (m + std::log((tx - m).exp().sum())) / temp;
    }
  } else {
    out.resize(x.rows(), 1);
    for (int i = 0; i < x.rows(); ++i) {
      const Eigen::ArrayXd tx = temp * x.row(i).transpose().array();
      const double m = tx.maxCoeff();
      out(i, 0) = (m + std::log((tx - m).exp().sum())) / temp;
    }
  }
  require_finite(out, "logsumexp result");
  Node n{Op::kLogsumexp, {a.node}, out, {}};
  n.c0 = temp;
  n.i0 = axis;
  return wrap(push(std::move(n)));
}

Var Tape::l2_norm(Var a) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = at(a).value.norm();
  return wrap(push({Op::kL2Norm, {a.node}, m, {}}));
}

Var Tape::l1_norm_smooth(Var a, double eps) {
  require(eps > 0.0, "l1_norm_smooth: eps must be positive");
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = (at(a).value.array().square() + eps).sqrt().sum();
  Node n{Op::kL1NormSmooth, {a.node}, m, {}};
  n.c0 = eps;
  return wrap(push(std::move(n)));
}

Var Tape::concat(std::span<const Var> parts, int axis) {
  require(!parts.empty(), "concat: no operands");
  require(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
  Node n{Op::kConcat, {}, {}, {}};
  n.i0 = axis;
  int rows = 0, cols = 0;
  for (const Var& p : parts) {
    require(p.tape == this, "concat: operand from a different tape");
    const auto& v = at(p).value;
    if (axis == 0) {
      require(n.parents.empty() || v.cols() == cols, "concat: column mismatch");
      rows += v.rows();
      cols = v.cols();
    } else {
      require(n.parents.empty() || v.rows() == rows, "concat: row mismatch");
      rows = v.rows();
      cols += v.cols();
    }
    n.parents.push_back(p.node);
  }
  n.value.resize(rows, cols);
  int off = 0;
  for (int pi : n.parents) {
    const auto& v = nodes_[pi].value;
    if (axis == 0) {
      n.value.middleRows(off, v.rows()) = v;
      off += v.rows();
    } else {
      n.value.middleCols(off, v.cols()) = v;
      off += v.cols();
    }
  }
  return wrap(push(std::move(n)));
}

Var Tape::slice(Var a, int row_begin, int row_count) {
  const auto& v = at(a).value;
  require(row_begin >= 0 && row_count >= 1 && row_begin + row_count <= v.rows(),
          "slice: row range out of bounds");
  Node n{Op::kSlice, {a.node}, v.middleRows(row_begin, row_count), {}};
  n.i0 = row_begin;
  return wrap(push(std::move(n)));
}

void Tape::backward(Var loss) {
  const Node& top = at(loss);
  require(top.value.rows() == 1 && top.value.cols() == 1,
          "backward: loss must be 1x1");
  // Each call sweeps in scratch space and adds one d(loss)/d(node) into the
  // persistent grads, so repeated calls accumulate without double-counting.
  std::vector<Eigen::MatrixXd> adj(loss.node + 1);
  auto accumulate = [&](int idx, const Eigen::MatrixXd& g) {
    if (adj[idx].size() == 0) {
      adj[idx] = g;
    } else {
      adj[idx] += g;
    }
  };
  accumulate(loss.node, Eigen::MatrixXd::Ones(1, 1));
  for (int idx = loss.node; idx >= 0; --idx) {
    Node& n = nodes_[idx];
    if (adj[idx].size() == 0 || n.op == Op::kLeaf) continue;
    const Eigen::MatrixXd& g = adj[idx];
    switch (n.op) {
      case Op::kAdd:
        accumulate(n.parents[0], g);
        accumulate(n.parents[1], g);
        break;
      case Op::kSub:
        accumulate(n.parents[0], g);
        accumulate(n.parents[1], -g);
        break;
      case Op::kMul:
        accumulate(n.parents[0], g.cwiseProduct(nodes_[n.parents[1]].value));
        accumulate(n.parents[1], g.cwiseProduct(nodes_[n.parents[0]].value));
        break;
      case Op::kMatmul:
        accumulate(n.parents[0], g * nodes_[n.parents[1]].value.transpose());
        accumulate(n.parents[1], nodes_[n.parents[0]].value.transpose() * g);
        break;
      case Op::kScale:
        accumulate(n.parents[0], g * n.c0);
        break;
      case Op::kSum: {
        const auto& p = nodes_[n.parents[0]].value;
        accumulate(n.parents[0],
                   Eigen::MatrixXd::Constant(p.rows(), p.cols(), g(0, 0)));
        break;
      }
      case Op::kRelu: {
        const auto& p = nodes_[n.parents[0]].value;
        accumulate(n.parents[0],
                   g.cwiseProduct((p.array() > 0.0).cast<double>().matrix()));
        break;
      }
      case Op::kTanh: {
        const auto& y = n.value;
        accumulate(n.parents[0],
                   g.cwiseProduct((1.0 - y.array().square()).matrix()));
        break;
      }
      case Op::kLogsumexp: {
        const auto& x = nodes_[n.parents[0]].value;
        Eigen::MatrixXd gx(x.rows(), x.cols());
        // d y_j / d x_ij = softmax(temp * x)_ij; rows/cols per axis.
        if (n.i0 == 0) {
          for (int j = 0; j < x.cols(); ++j) {
            Eigen::ArrayXd w = (n.c0 * (x.col(j).array() - n.value(0, j))).exp();
            gx.col(j) = (g(0, j) * (w / w.sum())).matrix();
          }
        } else {
          for (int i = 0; i < x.rows(); ++i) {
            Eigen::ArrayXd w =
                (n.c0 * (x.row(i).transpose().array() - n.value(i, 0))).exp();
            gx.row(i) = (g(i, 0) * (w / w.sum())).matrix().transpose();
          }
        }
        accumulate(n.parents[0], gx);
        break;
      }
      case Op::kL2Norm: {
        const auto& x = nodes_[n.parents[0]].value;
        const double norm = std::max(n.value(0, 0), 1e-12);
        accumulate(n.parents[0], (g(0, 0) / norm) * x);
        break;
      }
      case Op::kL1NormSmooth: {
        const auto& x = nodes_[n.parents[0]].value;
        Eigen::MatrixXd gx =
            g(0, 0) *
            (x.array() / (x.array().square() + n.c0).sqrt()).matrix();
        accumulate(n.parents[0], gx);
        break;
      }
      case Op::kConcat: {
        int off = 0;
        for (int pi : n.parents) {
          const auto& p = nodes_[pi].value;
          if (n.i0 == 0) {
            accumulate(pi, g.middleRows(off, p.rows()));
            off += p.rows();
          } else {
            accumulate(pi, g.middleCols(off, p.cols()));
            off += p.cols();
          }
        }
        break;
      }
      case Op::kSlice: {
        const auto& p = nodes_[n.parents[0]].value;
        Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(p.rows(), p.cols());
        gx.middleRows(n.i0, n.value.rows()) = g;
        accumulate(n.parents[0], gx);
        break;
      }
      case Op::kLeaf:
        break;
    }
  }
  for (int idx = 0; idx <= loss.node; ++idx) {
    if (adj[idx].size() == 0) continue;
    Node& n = nodes_[idx];
    if (n.grad.size() == 0) {
      n.grad = std::move(adj[idx]);
    } else {
      n.grad += adj[idx];
    }
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad.resize(0, 0);
}

void Tape::reset() { nodes_.clear(); }

void adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw std::invalid_argument("adam_step: param/grad shape mismatch");
  }
  if (state.m.size() == 0) {
    state.m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    state.v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
  }
  state.step += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  param.array() -=
      lr * (state.m.array() / bc1) /
      ((state.v.array() / bc2).sqrt() + eps);
}

}  // namespace stlswarm::ad
