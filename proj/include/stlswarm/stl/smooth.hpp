#pragma once

#include <span>

#include "stlswarm/ad/tape.hpp"
#include "stlswarm/stl/robustness.hpp"

namespace stlswarm::stl {

// Soft maximum (1/temp) log sum exp(temp x) over scalar vars; temp > 0.
// Overshoots the exact maximum by at most log(n)/temp.
ad::Var smooth_max(ad::Tape& tape, std::span<const ad::Var> xs, double temp);
// Undershoots the exact minimum by at most log(n)/temp.
ad::Var smooth_min(ad::Tape& tape, std::span<const ad::Var> xs, double temp);

// Smooth robustness of f over a trace of 2x1 position vars. Region distances
// use the smoothed L1 norm (eps = 1e-6); visit-count predicates evaluate on
// the current position values and enter the graph as constants. Satisfies
// |smooth - exact| <= depth(f) * log(max_aggregation_width(f)) / temp when
// the exact value is computed on the same positions with the same smoothed
// predicate distances.
ad::Var robustness_smooth(ad::Tape& tape, const Formula& f,
                          std::span<const ad::Var> trace, int t, double temp);

inline constexpr double kSmoothL1Eps = 1e-6;

}  // namespace stlswarm::stl
