#include "stlswarm/stl/smooth.hpp"

#include <stdexcept>

namespace stlswarm::stl {

namespace {

ad::Var stack(ad::Tape& tape, std::span<const ad::Var> xs) {
  if (xs.empty()) throw std::invalid_argument("smooth aggregation over empty set");
  if (xs.size() == 1) return xs[0];
  return tape.concat(xs, /*axis=*/0);
}

struct SmoothEval {
  ad::Tape& tape;
  std::span<const ad::Var> trace;
  double temp;

  ad::Var predicate(const Predicate& p, int t) const {
    if (const auto* r = std::get_if<RegionPredicate>(&p)) {
      ad::Var diff = tape.sub(trace[t], tape.leaf(r->center));
      return tape.sub(tape.leaf(r->radius),
                      tape.l1_norm_smooth(diff, kSmoothL1Eps));
    }
    if (const auto* h = std::get_if<HalfplanePredicate>(&p)) {
      ad::Var n = tape.leaf(Eigen::MatrixXd(h->normal.transpose()));
      return tape.sub(tape.matmul(n, trace[t]), tape.leaf(h->offset));
    }
    // Visit counts are a function of the current waypoint values and enter
    // the graph as a constant: the count channel carries no gradient.
    const auto& v = std::get<VisitCountPredicate>(p);
    Trace values;
    values.reserve(t + 1);
    for (int u = 0; u <= t; ++u) {
      values.emplace_back(trace[u].value());
    }
    const int n = entries_up_to(values, v.region, t);
    return tape.leaf(n >= v.required ? 1.0 : -1.0);
  }

  ad::Var eval(const Formula& f, int t) const {
    switch (f.kind) {
      case FormulaKind::kPredicate:
        return predicate(f.pred, t);
      case FormulaKind::kNot:
        return tape.scale(eval(*f.children[0], t), -1.0);
      case FormulaKind::kAnd:
      case FormulaKind::kOr: {
        std::vector<ad::Var> parts;
        parts.reserve(f.children.size());
        for (const auto& c : f.children) parts.push_back(eval(*c, t));
        return f.kind == FormulaKind::kAnd ? smooth_min(tape, parts, temp)
                                           : smooth_max(tape, parts, temp);
      }
      case FormulaKind::kImplies: {
        std::vector<ad::Var> parts{tape.scale(eval(*f.children[0], t), -1.0),
                                   eval(*f.children[1], t)};
        return smooth_max(tape, parts, temp);
      }
      case FormulaKind::kEventually:
      case FormulaKind::kGlobally: {
        std::vector<ad::Var> parts;
        parts.reserve(f.hi - f.lo + 1);
        for (int u = t + f.lo; u <= t + f.hi; ++u) {
          parts.push_back(eval(*f.children[0], u));
        }
        return f.kind == FormulaKind::kEventually
                   ? smooth_max(tape, parts, temp)
                   : smooth_min(tape, parts, temp);
      }
      case FormulaKind::kUntil: {
        std::vector<ad::Var> f_vals;
        f_vals.reserve(f.hi + 1);
        for (int u = t; u <= t + f.hi; ++u) {
          f_vals.push_back(eval(*f.children[0], u));
        }
        std::vector<ad::Var> outer;
        outer.reserve(f.hi - f.lo + 1);
        for (int u = t + f.lo; u <= t + f.hi; ++u) {
          std::vector<ad::Var> inner{eval(*f.children[1], u)};
          inner.insert(inner.end(), f_vals.begin(),
                       f_vals.begin() + (u - t + 1));
          outer.push_back(smooth_min(tape, inner, temp));
        }
        return smooth_max(tape, outer, temp);
      }
    }
    throw std::logic_error("unreachable");
  }
};

}  // namespace

ad::Var smooth_max(ad::Tape& tape, std::span<const ad::Var> xs, double temp) {
  if (temp <= 0.0) throw std::invalid_argument("smooth_max: temp must be positive");
  return tape.logsumexp(stack(tape, xs), /*axis=*/0, temp);
}

ad::Var smooth_min(ad::Tape& tape, std::span<const ad::Var> xs, double temp) {
  if (temp <= 0.0) throw std::invalid_argument("smooth_min: temp must be positive");
  return tape.logsumexp(stack(tape, xs), /*axis=*/0, -temp);
}

ad::Var robustness_smooth(ad::Tape& tape, const Formula& f,
                          std::span<const ad::Var> trace, int t, double temp) {
  if (t < 0) throw std::invalid_argument("evaluation time must be >= 0");
  const int needed = t + horizon(f);
  if (trace.empty() || needed > static_cast<int>(trace.size()) - 1) {
    throw HorizonError("trace too short for formula horizon: needs index " +
                       std::to_string(needed) + ", trace ends at " +
                       std::to_string(static_cast<int>(trace.size()) - 1));
  }
  for (const ad::Var& p : trace) {
    if (p.rows() != 2 || p.cols() != 1) {
      throw std::invalid_argument("trace positions must be 2x1 vars");
    }
  }
  return SmoothEval{tape, trace, temp}.eval(f, t);
}

}  // namespace stlswarm::stl
