#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "stlswarm/stl/formula.hpp"

namespace stlswarm::stl {

class HorizonError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One agent's position sequence at formula resolution: element t is the state
// the formula indexes as time t.
using Trace = std::vector<Eigen::Vector2d>;

// Exact quantitative semantics at time t. Throws HorizonError unless
// t + horizon(f) <= trace.size() - 1.
double robustness_exact(const Formula& f, const Trace& trace, int t);

// Satisfaction with ties at exactly 0 counting as satisfied.
bool boolean_sat(const Formula& f, const Trace& trace, int t);

double predicate_robustness(const Predicate& p, const Trace& trace, int t);

// Disjoint entries of the trace prefix [0, t] into the region, where an entry
// is an outside-to-inside transition (the initial state inside counts).
int entries_up_to(const Trace& trace, const RegionPredicate& region, int t);

}  // namespace stlswarm::stl
