#include "stlswarm/safety/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stlswarm::safety {

namespace {

constexpr double kFeasTol = 1e-9;

// Velocity used by the barrier: the workspace velocity the action actually
// steers. For dubins that is v (cos theta, sin theta).
Eigen::Vector2d actuated_velocity(const env::State& x,
                                  const env::EnvConfig& cfg) {
  if (cfg.kind == env::EnvKind::kDubins) {
    return x(3) * Eigen::Vector2d(std::cos(x(2)), std::sin(x(2)));
  }
  return env::velocity_of(x, cfg);
}

env::Action braking_action(const env::State& x, const env::EnvConfig& cfg) {
  switch (cfg.kind) {
    case env::EnvKind::kSingleIntegrator:
      return env::Action::Zero();
    case env::EnvKind::kDoubleIntegrator:
      return env::clamp_action(-env::velocity_of(x, cfg) / cfg.dt, cfg);
    case env::EnvKind::kDubins:
      return env::clamp_action(env::Action(0.0, -x(3) / cfg.dt), cfg);
  }
  return env::Action::Zero();
}

}  // namespace

env::Action nominal_control(const env::State& x, const Eigen::Vector2d& goal,
                            const env::EnvConfig& cfg,
                            const ControllerConfig& ctrl) {
  const Eigen::Vector2d to_goal = goal - env::position_of(x);
  switch (cfg.kind) {
    case env::EnvKind::kSingleIntegrator:
      return env::clamp_action(ctrl.kp * to_goal, cfg);
    case env::EnvKind::kDoubleIntegrator:
      return env::clamp_action(
          ctrl.kp * to_goal - ctrl.kd * env::velocity_of(x, cfg), cfg);
    case env::EnvKind::kDubins: {
      const double dist = to_goal.norm();
      const double theta = x(2);
      const double v = x(3);
      double omega = 0.0;
      double v_des = 0.0;
      if (dist > 1e-9) {
        const double bearing = std::atan2(to_goal.y(), to_goal.x());
        omega = ctrl.k_heading * env::wrap_angle(bearing - theta);
        v_des = std::min(cfg.dubins_v_max, dist);
      }
      return env::clamp_action(
          env::Action(omega, ctrl.k_speed * (v_des - v)), cfg);
    }
  }
  return env::Action::Zero();
}

std::vector<Constraint> cbf_constraints(const env::State& x,
                                        const std::vector<Hazard>& hazards,
                                        const env::EnvConfig& cfg,
                                        const ControllerConfig& ctrl,
                                        int max_hazards) {
  const Eigen::Vector2d p = env::position_of(x);
  const double d_min = 2.0 * cfg.agent_radius + ctrl.margin;
  const double alpha = ctrl.alpha;

  // Nearest hazards first; ties keep input order.
  std::vector<int> order(hazards.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return (hazards[i].position - p).squaredNorm() <
           (hazards[j].position - p).squaredNorm();
  });
  if (static_cast<int>(order.size()) > max_hazards) order.resize(max_hazards);

  std::vector<Constraint> out;
  out.reserve(order.size());
  for (int idx : order) {
    const Hazard& hz = hazards[idx];
    const Eigen::Vector2d p_rel = p - hz.position;
    const double h = p_rel.squaredNorm() - d_min * d_min;
    Constraint c;
    if (cfg.kind == env::EnvKind::kSingleIntegrator) {
      // d/dt h = 2 p_rel . (u - v_other); require dh/dt + alpha h >= 0.
      c.a = 2.0 * p_rel;
      c.b = 2.0 * p_rel.dot(hz.velocity) - alpha * h;
    } else {
      // The action enters through the second derivative. With
      // psi = dh/dt + alpha h, requiring dpsi/dt + alpha psi >= 0 gives a
      // condition linear in the actuated acceleration w_dot:
      //   2 p_rel . w_dot >= -2 |v_rel|^2 - 2 alpha dh/dt - alpha^2 h.
      const Eigen::Vector2d v_rel = actuated_velocity(x, cfg) - hz.velocity;
      const double h_dot = 2.0 * p_rel.dot(v_rel);
      const double rhs = -2.0 * v_rel.squaredNorm() - 2.0 * alpha * h_dot -
                         alpha * alpha * h;
      if (cfg.kind == env::EnvKind::kDoubleIntegrator) {
        c.a = 2.0 * p_rel;
        c.b = rhs;
      } else {
        // Dubins: w_dot = J u with u = (omega, accel), so the half-space
        // pulls back through J.
        const double theta = x(2);
        const double v = x(3);
        Eigen::Matrix2d jac;
        jac << -v * std::sin(theta), std::cos(theta),
               v * std::cos(theta), std::sin(theta);
        c.a = jac.transpose() * (2.0 * p_rel);
        c.b = rhs;
      }
    }
    out.push_back(c);
  }
  return out;
}

FilterResult cbf_filter(const env::State& x, const env::Action& u_nom,
                        const std::vector<Constraint>& constraints,
                        const env::EnvConfig& cfg) {
  // The action box joins the barrier half-spaces as four more constraints.
  std::vector<Constraint> all = constraints;
  const double lim = cfg.action_limit;
  all.push_back({Eigen::Vector2d(1.0, 0.0), -lim});
  all.push_back({Eigen::Vector2d(-1.0, 0.0), -lim});
  all.push_back({Eigen::Vector2d(0.0, 1.0), -lim});
  all.push_back({Eigen::Vector2d(0.0, -1.0), -lim});
  const int m = static_cast<int>(all.size());

  const auto residual = [&](const env::Action& u) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Constraint& c : all) worst = std::min(worst, c.a.dot(u) - c.b);
    return worst;
  };

  FilterResult best;
  best.feasible = false;
  double best_cost = std::numeric_limits<double>::infinity();
  const auto consider = [&](const env::Action& u) {
    if (!u.allFinite() || residual(u) < -kFeasTol) return;
    const double cost = (u - u_nom).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best.u = u;
      best.feasible = true;
    }
  };

  // The optimum of a planar projection QP activates at most two constraints,
  // so enumerating every candidate active set of size <= 2 is exact.
  consider(u_nom);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d& a = all[i].a;
    const double g = a.squaredNorm();
    if (g < 1e-18) continue;
    consider(u_nom + ((all[i].b - a.dot(u_nom)) / g) * a);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Eigen::Matrix2d gram;
      gram << all[i].a.dot(all[i].a), all[i].a.dot(all[j].a),
              all[j].a.dot(all[i].a), all[j].a.dot(all[j].a);
      if (std::abs(gram.determinant()) < 1e-14) continue;
      const Eigen::Vector2d rhs(all[i].b - all[i].a.dot(u_nom),
                                all[j].b - all[j].a.dot(u_nom));
      const Eigen::Vector2d lambda = gram.inverse() * rhs;
      consider(u_nom + lambda(0) * all[i].a + lambda(1) * all[j].a);
    }
  }

  if (!best.feasible) {
    best.u = braking_action(x, cfg);
  }
  best.min_residual = residual(best.u);
  return best;
}

FilterResult safe_control(const env::State& x, const Eigen::Vector2d& goal,
                          const std::vector<Hazard>& hazards,
                          const env::EnvConfig& cfg,
                          const ControllerConfig& ctrl, int max_hazards) {
  const env::Action u_nom = nominal_control(x, goal, cfg, ctrl);
  const auto constraints = cbf_constraints(x, hazards, cfg, ctrl, max_hazards);
  return cbf_filter(x, u_nom, constraints, cfg);
}

}  // namespace stlswarm::safety
