#pragma once

#include <vector>

#include "stlswarm/env/env.hpp"

namespace stlswarm::safety {

struct ControllerConfig {
  double kp = 1.0;         // position gain
  double kd = 2.0;         // velocity damping (double integrator)
  double k_heading = 2.0;  // steering gain (dubins)
  double k_speed = 1.0;    // speed gain (dubins)
  double alpha = 1.0;      // barrier decay rate
  double margin = 0.05;    // filtered separation beyond two agent radii
};

// Goal-tracking action with no awareness of other agents, clamped to the
// action box. Integrators servo on position; dubins steers toward the goal
// bearing and tracks a distance-proportional speed.
env::Action nominal_control(const env::State& x, const Eigen::Vector2d& goal,
                            const env::EnvConfig& cfg,
                            const ControllerConfig& ctrl);

// Half-space a^T u >= b in action space.
struct Constraint {
  Eigen::Vector2d a;
  double b = 0.0;
};

// A hazard as seen by one agent: another agent's position and velocity, or a
// static point (zero velocity).
struct Hazard {
  Eigen::Vector2d position;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

// One barrier constraint per hazard, nearest `max_hazards` first. The barrier
// is h = |p_rel|^2 - (2 r + margin)^2; first-order actuation (single
// integrator) enforces dh/dt + alpha h >= 0 directly, the others push the
// same condition through one more derivative since their barrier has relative
// degree two.
std::vector<Constraint> cbf_constraints(const env::State& x,
                                        const std::vector<Hazard>& hazards,
                                        const env::EnvConfig& cfg,
                                        const ControllerConfig& ctrl,
                                        int max_hazards = 8);

struct FilterResult {
  env::Action u = env::Action::Zero();
  bool feasible = true;
  // min over constraints of a^T u - b at the returned action; >= -1e-9
  // whenever feasible.
  double min_residual = 0.0;
};

// Projects u_nom onto the intersection of the barrier half-spaces and the
// action box: exact active-set enumeration over all subsets of at most two
// constraints (the action is planar). Infeasible intersections fall back to
// braking and report it.
FilterResult cbf_filter(const env::State& x, const env::Action& u_nom,
                        const std::vector<Constraint>& constraints,
                        const env::EnvConfig& cfg);

// Convenience wrapper: nominal control, constraints from hazards, filter.
FilterResult safe_control(const env::State& x, const Eigen::Vector2d& goal,
                          const std::vector<Hazard>& hazards,
                          const env::EnvConfig& cfg,
                          const ControllerConfig& ctrl, int max_hazards = 8);

}  // namespace stlswarm::safety
