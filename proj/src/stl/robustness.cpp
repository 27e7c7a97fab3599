#include "stlswarm/stl/robustness.hpp"

#include <algorithm>
#include <limits>

namespace stlswarm::stl {

namespace {

double eval(const Formula& f, const Trace& trace, int t);

double eval_window_max(const Formula& f, const Trace& trace, int t, bool maximize) {
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (int u = t + f.lo; u <= t + f.hi; ++u) {
    const double v = eval(*f.children[0], trace, u);
    best = maximize ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

double eval(const Formula& f, const Trace& trace, int t) {
  switch (f.kind) {
    case FormulaKind::kPredicate:
      return predicate_robustness(f.pred, trace, t);
    case FormulaKind::kNot:
      return -eval(*f.children[0], trace, t);
    case FormulaKind::kAnd: {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& c : f.children) v = std::min(v, eval(*c, trace, t));
      return v;
    }
    case FormulaKind::kOr: {
      double v = -std::numeric_limits<double>::infinity();
      for (const auto& c : f.children) v = std::max(v, eval(*c, trace, t));
      return v;
    }
    case FormulaKind::kImplies:
      // f -> g is evaluated as !f | g.
      return std::max(-eval(*f.children[0], trace, t), eval(*f.children[1], trace, t));
    case FormulaKind::kEventually:
      return eval_window_max(f, trace, t, /*maximize=*/true);
    case FormulaKind::kGlobally:
      return eval_window_max(f, trace, t, /*maximize=*/false);
    case FormulaKind::kUntil: {
      double best = -std::numeric_limits<double>::infinity();
      double f_prefix = std::numeric_limits<double>::infinity();
      for (int u = t; u <= t + f.hi; ++u) {
        f_prefix = std::min(f_prefix, eval(*f.children[0], trace, u));
        if (u < t + f.lo) continue;
        best = std::max(best, std::min(eval(*f.children[1], trace, u), f_prefix));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

double predicate_robustness(const Predicate& p, const Trace& trace, int t) {
  const Eigen::Vector2d& pos = trace[t];
  if (const auto* r = std::get_if<RegionPredicate>(&p)) {
    return r->radius - (pos - r->center).lpNorm<1>();
  }
  if (const auto* h = std::get_if<HalfplanePredicate>(&p)) {
    return h->normal.dot(pos) - h->offset;
  }
  const auto& v = std::get<VisitCountPredicate>(p);
  return entries_up_to(trace, v.region, t) >= v.required ? 1.0 : -1.0;
}

int entries_up_to(const Trace& trace, const RegionPredicate& region, int t) {
  int count = 0;
  bool inside_prev = false;
  for (int u = 0; u <= t; ++u) {
    const bool inside = (trace[u] - region.center).lpNorm<1>() <= region.radius;
    if (inside && !inside_prev) ++count;
    inside_prev = inside;
  }
  return count;
}

double robustness_exact(const Formula& f, const Trace& trace, int t) {
  if (t < 0) throw std::invalid_argument("evaluation time must be >= 0");
  const int needed = t + horizon(f);
  if (trace.empty() || needed > static_cast<int>(trace.size()) - 1) {
    throw HorizonError("trace too short for formula horizon: needs index " +
                       std::to_string(needed) + ", trace ends at " +
                       std::to_string(static_cast<int>(trace.size()) - 1));
  }
  return eval(f, trace, t);
}

bool boolean_sat(const Formula& f, const Trace& trace, int t) {
  return robustness_exact(f, trace, t) >= 0.0;
}

}  // namespace stlswarm::stl
