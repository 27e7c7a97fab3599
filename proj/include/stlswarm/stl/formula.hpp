#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stlswarm::stl {

// Robustness is radius minus the L1 distance to center.
struct RegionPredicate {
  Eigen::Vector2d center;
  double radius = 1.0;
  std::string name;

  bool operator==(const RegionPredicate& o) const {
    return center == o.center && radius == o.radius && name == o.name;
  }
};

// Robustness is normal . p - offset.
struct HalfplanePredicate {
  Eigen::Vector2d normal;
  double offset = 0.0;

  bool operator==(const HalfplanePredicate& o) const {
    return normal == o.normal && offset == o.offset;
  }
};

// Counts disjoint entries into the region along the trace prefix (the initial
// state lying inside counts as an entry). Robustness is +1 when the count has
// reached `required`, otherwise -1; constant with respect to positions under
// the smooth semantics.
struct VisitCountPredicate {
  RegionPredicate region;
  int required = 2;

  bool operator==(const VisitCountPredicate& o) const {
    return region == o.region && required == o.required;
  }
};

using Predicate =
    std::variant<RegionPredicate, HalfplanePredicate, VisitCountPredicate>;

enum class FormulaKind {
  kPredicate,
  kNot,
  kAnd,
  kOr,
  kImplies,
  kEventually,
  kGlobally,
  kUntil,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable formula node. Temporal bounds are inclusive plan-step indices.
struct Formula {
  FormulaKind kind;
  Predicate pred;                    // kPredicate only
  std::vector<FormulaPtr> children;  // operands in order
  int lo = 0, hi = 0;                // kEventually / kGlobally / kUntil

  bool operator==(const Formula& o) const;
};

FormulaPtr make_predicate(Predicate p);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(std::vector<FormulaPtr> fs);   // needs >= 2 operands
FormulaPtr make_or(std::vector<FormulaPtr> fs);    // needs >= 2 operands
FormulaPtr make_implies(FormulaPtr f, FormulaPtr g);
FormulaPtr make_eventually(int lo, int hi, FormulaPtr f);
FormulaPtr make_globally(int lo, int hi, FormulaPtr f);
FormulaPtr make_until(int lo, int hi, FormulaPtr f, FormulaPtr g);

int depth(const Formula& f);
int node_count(const Formula& f);
// Largest lookahead in plan steps: evaluation at t touches indices up to
// t + horizon(f).
int horizon(const Formula& f);
// Largest number of values any single min/max aggregation combines during
// evaluation; 1 for formulas without And/Or/temporal nodes.
int max_aggregation_width(const Formula& f);

std::string to_string(const Formula& f);

using RegionTable = std::map<std::string, RegionPredicate>;

}  // namespace stlswarm::stl
