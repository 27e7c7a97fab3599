#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace stlswarm::env {

enum class EnvKind { kSingleIntegrator, kDoubleIntegrator, kDubins };

std::string to_string(EnvKind k);
EnvKind env_kind_from_string(const std::string& s);

struct Circle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

struct EnvConfig {
  EnvKind kind = EnvKind::kSingleIntegrator;
  double dt = 0.03;
  double agent_radius = 0.05;
  double sensing_radius = 0.5;  // must exceed twice the agent radius
  int n_rays = 32;
  double action_limit = 1.0;  // per-component box on u
  double dubins_v_max = 1.0;
  Eigen::Vector2d arena_lo{-1.0, -1.0};
  Eigen::Vector2d arena_hi{3.0, 3.0};
  std::vector<Circle> obstacles;
  bool use_rk4 = false;

  // single: [px, py]; double: [px, py, vx, vy]; dubins: [px, py, theta, v].
  int state_dim() const;
  int action_dim() const { return 2; }
  void validate() const;
};

using State = Eigen::VectorXd;
using Action = Eigen::Vector2d;

Eigen::Vector2d position_of(const State& x);
// Velocity in workspace coordinates; zero for single integrators, whose
// states carry none.
Eigen::Vector2d velocity_of(const State& x, const EnvConfig& cfg);

Action clamp_action(const Action& u, const EnvConfig& cfg);

struct StepResult {
  State next;
  bool clamped = false;
};

// One explicit Euler step (RK4 when cfg.use_rk4); heading wrapped to
// (-pi, pi], dubins speed clamped to [-v_max, v_max]. Throws on non-finite
// input.
StepResult step(const State& x, const Action& u, const EnvConfig& cfg);

double wrap_angle(double a);

// Distance from pos along each ray to the nearest obstacle boundary, capped
// at the sensing radius. Ray j leaves at angle heading + 2 pi j / n_rays.
std::vector<double> lidar_scan(const Eigen::Vector2d& pos, double heading,
                               const EnvConfig& cfg);

// Ray hit points strictly inside the sensing radius, as (ray index, point).
std::vector<std::pair<int, Eigen::Vector2d>> lidar_hits(
    const Eigen::Vector2d& pos, double heading, const EnvConfig& cfg);

double heading_of(const State& x, const EnvConfig& cfg);

// Minimum center-to-center distance over all pairs; needs at least 2 agents.
double pairwise_min_distance(const std::vector<State>& states);

// Uniform positions over the arena, rejecting draws until every pair is
// separated by more than 2.5 agent radii and clear of obstacles; dubins
// headings uniform, all velocities zero.
std::vector<State> sample_initial_states(int n_agents, const EnvConfig& cfg,
                                         std::uint64_t seed);

struct Trajectory {
  std::vector<std::vector<State>> states;    // [step][agent]
  std::vector<std::vector<Action>> actions;  // [step][agent]; may be empty
  double dt = 0.0;

  int steps() const { return static_cast<int>(states.size()); }
  int n_agents() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
};

// Re-steps the recorded actions from the recorded start and compares states
// for exact equality.
bool replay_consistent(const Trajectory& traj, const EnvConfig& cfg);

}  // namespace stlswarm::env
