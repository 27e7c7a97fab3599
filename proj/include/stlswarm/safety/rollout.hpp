#pragma once

#include <vector>

#include "stlswarm/planner/planner.hpp"
#include "stlswarm/safety/controller.hpp"

namespace stlswarm::safety {

struct RolloutConfig {
  ControllerConfig ctrl;
  double r_goal = 0.3;     // waypoint acceptance radius
  int max_hazards = 8;     // constraints kept per agent per step
  bool use_cbf = true;     // false tracks the nominal control unfiltered
  bool stop_when_done = false;  // stop stepping once every agent finished
};

struct RolloutResult {
  env::Trajectory traj;  // states[0] is the initial state; actions aligned
  // visit_steps[i][w] = simulation step when agent i recorded waypoint w,
  // -1 when never reached. finished agents have visit_steps[i][T] >= 0.
  std::vector<std::vector<int>> visit_steps;
  std::vector<bool> finished;
  int infeasible_fallbacks = 0;

  bool all_finished() const;
  // Largest recorded final-waypoint step; -1 unless every agent finished.
  int completion_step() const;
};

// Runs the plan for up to max_steps simulation steps. Each agent tracks its
// current waypoint g_w; standing within r_goal of it advances w once the
// schedule allows (step >= goal_interval * (w + 1)), except the final
// waypoint, which is recorded on arrival. Advancement cascades within one
// step whenever the gates allow. Finished agents keep station at g_T.
//
// The filter sees other agents within the sensing radius and every lidar
// hit. Neighbor velocity is read from the state when it carries one and
// estimated by backward difference for single integrators (zero at t = 0).
RolloutResult rollout(const planner::GoalPlan& plan,
                      const std::vector<env::State>& initial,
                      const env::EnvConfig& cfg, int goal_interval,
                      int max_steps, const RolloutConfig& rc);

}  // namespace stlswarm::safety
