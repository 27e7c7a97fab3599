#include "stlswarm/env/env.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stlswarm::env {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

State derivative(const State& x, const Action& u, const EnvConfig& cfg) {
  State dx(x.size());
  switch (cfg.kind) {
    case EnvKind::kSingleIntegrator:
      dx << u.x(), u.y();
      break;
    case EnvKind::kDoubleIntegrator:
      dx << x(2), x(3), u.x(), u.y();
      break;
    case EnvKind::kDubins:
      // u = (omega, a); theta integrates the turn rate, v the acceleration.
      dx << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), u.x(), u.y();
      break;
  }
  return dx;
}

void normalize_state(State& x, const EnvConfig& cfg) {
  if (cfg.kind == EnvKind::kDubins) {
    x(2) = wrap_angle(x(2));
    x(3) = std::clamp(x(3), -cfg.dubins_v_max, cfg.dubins_v_max);
  }
}

}  // namespace

std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::kSingleIntegrator: return "single_integrator";
    case EnvKind::kDoubleIntegrator: return "double_integrator";
    case EnvKind::kDubins: return "dubins";
  }
  throw std::logic_error("unreachable");
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "single_integrator") return EnvKind::kSingleIntegrator;
  if (s == "double_integrator") return EnvKind::kDoubleIntegrator;
  if (s == "dubins") return EnvKind::kDubins;
  throw std::invalid_argument("unknown environment '" + s + "'");
}

int EnvConfig::state_dim() const {
  return kind == EnvKind::kSingleIntegrator ? 2 : 4;
}

void EnvConfig::validate() const {
  require(dt > 0.0, "dt must be positive");
  require(agent_radius > 0.0, "agent_radius must be positive");
  require(sensing_radius > 2.0 * agent_radius,
          "sensing_radius must exceed twice the agent radius");
  require(n_rays >= 0, "n_rays must be nonnegative");
  require(action_limit > 0.0, "action_limit must be positive");
  require(dubins_v_max > 0.0, "dubins_v_max must be positive");
  require((arena_hi - arena_lo).minCoeff() > 0.0, "arena must have positive extent");
  for (const auto& o : obstacles) {
    require(o.radius > 0.0, "obstacle radius must be positive");
  }
}

Eigen::Vector2d position_of(const State& x) { return x.head<2>(); }

Eigen::Vector2d velocity_of(const State& x, const EnvConfig& cfg) {
  switch (cfg.kind) {
    case EnvKind::kSingleIntegrator:
      return Eigen::Vector2d::Zero();
    case EnvKind::kDoubleIntegrator:
      return x.segment<2>(2);
    case EnvKind::kDubins:
      return {x(3) * std::cos(x(2)), x(3) * std::sin(x(2))};
  }
  throw std::logic_error("unreachable");
}

double heading_of(const State& x, const EnvConfig& cfg) {
  return cfg.kind == EnvKind::kDubins ? x(2) : 0.0;
}

Action clamp_action(const Action& u, const EnvConfig& cfg) {
  return u.cwiseMax(-cfg.action_limit).cwiseMin(cfg.action_limit);
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

StepResult step(const State& x, const Action& u, const EnvConfig& cfg) {
  require(x.size() == cfg.state_dim(), "state dimension mismatch");
  if (!x.allFinite() || !u.allFinite()) {
    throw std::invalid_argument("non-finite state or action");
  }
  const Action uc = clamp_action(u, cfg);
  StepResult r;
  r.clamped = (uc - u).cwiseAbs().maxCoeff() > 0.0;
  if (cfg.use_rk4) {
    const State k1 = derivative(x, uc, cfg);
    const State k2 = derivative(x + 0.5 * cfg.dt * k1, uc, cfg);
    const State k3 = derivative(x + 0.5 * cfg.dt * k2, uc, cfg);
    const State k4 = derivative(x + cfg.dt * k3, uc, cfg);
    r.next = x + (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  } else {
    r.next = x + cfg.dt * derivative(x, uc, cfg);
  }
  normalize_state(r.next, cfg);
  return r;
}

std::vector<double> lidar_scan(const Eigen::Vector2d& pos, double heading,
                               const EnvConfig& cfg) {
  std::vector<double> out(cfg.n_rays, cfg.sensing_radius);
  for (int j = 0; j < cfg.n_rays; ++j) {
    const double ang = heading + 2.0 * kPi * j / cfg.n_rays;
    const Eigen::Vector2d dir{std::cos(ang), std::sin(ang)};
    double best = cfg.sensing_radius;
    for (const Circle& c : cfg.obstacles) {
      // Nearest nonnegative root of |pos + t dir - center|^2 = r^2.
      const Eigen::Vector2d oc = pos - c.center;
      const double b = oc.dot(dir);
      const double disc = b * b - (oc.squaredNorm() - c.radius * c.radius);
      if (disc < 0.0) continue;
      const double root = std::sqrt(disc);
      double t = -b - root;
      if (t < 0.0) t = -b + root;  // pos inside the obstacle
      if (t >= 0.0 && t < best) best = t;
    }
    out[j] = best;
  }
  return out;
}

std::vector<std::pair<int, Eigen::Vector2d>> lidar_hits(
    const Eigen::Vector2d& pos, double heading, const EnvConfig& cfg) {
  std::vector<std::pair<int, Eigen::Vector2d>> hits;
  const std::vector<double> dists = lidar_scan(pos, heading, cfg);
  for (int j = 0; j < cfg.n_rays; ++j) {
    if (dists[j] < cfg.sensing_radius) {
      const double ang = heading + 2.0 * kPi * j / cfg.n_rays;
      hits.emplace_back(j, pos + dists[j] * Eigen::Vector2d{std::cos(ang),
                                                            std::sin(ang)});
    }
  }
  return hits;
}

double pairwise_min_distance(const std::vector<State>& states) {
  if (states.size() < 2) {
    throw std::invalid_argument("pairwise distance needs at least 2 agents");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      best = std::min(best,
                      (position_of(states[i]) - position_of(states[j])).norm());
    }
  }
  return best;
}

std::vector<State> sample_initial_states(int n_agents, const EnvConfig& cfg,
                                         std::uint64_t seed) {
  require(n_agents >= 1, "need at least one agent");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(cfg.arena_lo.x(), cfg.arena_hi.x());
  std::uniform_real_distribution<double> uy(cfg.arena_lo.y(), cfg.arena_hi.y());
  std::uniform_real_distribution<double> uang(-kPi, kPi);
  const double min_sep = 2.5 * cfg.agent_radius;

  std::vector<Eigen::Vector2d> pos;
  int attempts = 0;
  while (static_cast<int>(pos.size()) < n_agents) {
    if (++attempts > 100000) {
      throw std::runtime_error("initial state sampling failed to separate agents");
    }
    Eigen::Vector2d p{ux(rng), uy(rng)};
    bool ok = true;
    for (const auto& q : pos) ok = ok && (p - q).norm() > min_sep;
    for (const auto& o : cfg.obstacles) {
      ok = ok && (p - o.center).norm() > o.radius + 2.0 * cfg.agent_radius;
    }
    if (ok) pos.push_back(p);
  }

  std::vector<State> states;
  states.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    State x = State::Zero(cfg.state_dim());
    x.head<2>() = pos[i];
    if (cfg.kind == EnvKind::kDubins) x(2) = uang(rng);
    states.push_back(std::move(x));
  }
  return states;
}

bool replay_consistent(const Trajectory& traj, const EnvConfig& cfg) {
  if (traj.states.empty() || traj.actions.size() + 1 != traj.states.size()) {
    return false;
  }
  std::vector<State> cur = traj.states[0];
  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = step(cur[i], traj.actions[t][i], cfg).next;
      if (cur[i] != traj.states[t + 1][i]) return false;
    }
  }
  return true;
}

}  // namespace stlswarm::env
