#include "stlswarm/safety/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlswarm::safety {

namespace {

Eigen::Vector2d neighbor_velocity(const std::vector<env::State>& cur,
                                  const std::vector<env::State>& prev,
                                  int j, const env::EnvConfig& cfg, int t) {
  if (cfg.kind == env::EnvKind::kSingleIntegrator) {
    // The state carries no velocity; estimate it from the last step.
    if (t == 0) return Eigen::Vector2d::Zero();
    return (env::position_of(cur[j]) - env::position_of(prev[j])) / cfg.dt;
  }
  if (cfg.kind == env::EnvKind::kDubins) {
    return cur[j](3) * Eigen::Vector2d(std::cos(cur[j](2)),
                                       std::sin(cur[j](2)));
  }
  return env::velocity_of(cur[j], cfg);
}

}  // namespace

bool RolloutResult::all_finished() const {
  return std::all_of(finished.begin(), finished.end(),
                     [](bool f) { return f; });
}

int RolloutResult::completion_step() const {
  if (!all_finished()) return -1;
  int worst = 0;
  for (const auto& v : visit_steps) worst = std::max(worst, v.back());
  return worst;
}

RolloutResult rollout(const planner::GoalPlan& plan,
                      const std::vector<env::State>& initial,
                      const env::EnvConfig& cfg, int goal_interval,
                      int max_steps, const RolloutConfig& rc) {
  const int n = static_cast<int>(initial.size());
  if (n < 1) throw std::invalid_argument("rollout needs at least one agent");
  if (static_cast<int>(plan.size()) != n) {
    throw std::invalid_argument("plan covers " + std::to_string(plan.size()) +
                                " agents, state has " + std::to_string(n));
  }
  const int T = static_cast<int>(plan[0].size()) - 1;
  if (T < 0) throw std::invalid_argument("plan needs at least one waypoint");
  for (const auto& agent_plan : plan) {
    if (static_cast<int>(agent_plan.size()) != T + 1) {
      throw std::invalid_argument("agents disagree on plan length");
    }
  }
  if (goal_interval < 1) {
    throw std::invalid_argument("goal interval must be positive");
  }
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");

  RolloutResult out;
  out.traj.dt = cfg.dt;
  out.traj.states.reserve(max_steps + 1);
  out.traj.actions.reserve(max_steps);
  out.visit_steps.assign(n, std::vector<int>(T + 1, -1));
  out.finished.assign(n, false);

  std::vector<int> target(n, 0);
  std::vector<env::State> cur = initial;
  std::vector<env::State> prev = initial;

  for (int t = 0;; ++t) {
    out.traj.states.push_back(cur);

    // Record waypoint visits at the current state before acting. The final
    // waypoint counts on arrival; earlier ones wait for their schedule slot
    // and may cascade when the gates allow.
    for (int i = 0; i < n; ++i) {
      while (!out.finished[i]) {
        const Eigen::Vector2d p = env::position_of(cur[i]);
        if ((p - plan[i][target[i]]).norm() > rc.r_goal) break;
        if (target[i] == T) {
          out.visit_steps[i][T] = t;
          out.finished[i] = true;
        } else if (t >= goal_interval * (target[i] + 1)) {
          out.visit_steps[i][target[i]] = t;
          ++target[i];
        } else {
          break;
        }
      }
    }

    if (t == max_steps) break;
    if (rc.stop_when_done && out.all_finished()) break;

    std::vector<env::Action> actions(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d goal = plan[i][target[i]];
      env::Action u = nominal_control(cur[i], goal, cfg, rc.ctrl);
      if (rc.use_cbf) {
        std::vector<Hazard> hazards;
        const Eigen::Vector2d p = env::position_of(cur[i]);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const Eigen::Vector2d pj = env::position_of(cur[j]);
          if ((pj - p).norm() > cfg.sensing_radius) continue;
          hazards.push_back({pj, neighbor_velocity(cur, prev, j, cfg, t)});
        }
        for (const auto& [ray, point] :
             env::lidar_hits(p, env::heading_of(cur[i], cfg), cfg)) {
          hazards.push_back({point, Eigen::Vector2d::Zero()});
        }
        const auto constraints =
            cbf_constraints(cur[i], hazards, cfg, rc.ctrl, rc.max_hazards);
        const FilterResult res = cbf_filter(cur[i], u, constraints, cfg);
        if (!res.feasible) ++out.infeasible_fallbacks;
        u = res.u;
      }
      actions[i] = u;
    }

    std::vector<env::State> next(n);
    for (int i = 0; i < n; ++i) next[i] = env::step(cur[i], actions[i], cfg).next;
    out.traj.actions.push_back(std::move(actions));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

}  // namespace stlswarm::safety
