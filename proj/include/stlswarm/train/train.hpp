#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "stlswarm/planner/planner.hpp"
#include "stlswarm/safety/rollout.hpp"
#include "stlswarm/stl/smooth.hpp"

namespace stlswarm::train {

struct TrainConfig {
  int epochs = 200;
  int batch = 8;         // scenarios per epoch
  int n_agents = 4;
  double lr = 1e-3;
  double lambda_stl = 1.0;
  double lambda_ach = 0.1;
  double temp = 10.0;    // smooth semantics temperature
  std::uint64_t seed = 0;
  int hidden = 64;
  int gnn_layers = 2;
  int jobs = 1;          // scenario rollout parallelism
  safety::RolloutConfig rollout;  // training never stops early
};

struct LossParts {
  double total = 0.0;
  double stl = 0.0;  // weighted negative smooth robustness term
  double ach = 0.0;  // weighted achievability gap term
};

// executed[i][t] = position agent i actually reached at simulation step
// goal_interval * t, for t = 0..plan_steps.
using ExecutedSamples = std::vector<std::vector<Eigen::Vector2d>>;

ExecutedSamples sample_executed(const env::Trajectory& traj, int goal_interval,
                                int plan_steps);

// One scenario's loss on the tape: each agent's plan scores the mission under
// the smooth semantics, and the achievability term pulls every waypoint
// toward where the filtered execution actually was at its sample instant.
// Executed samples enter as constants, so gradients flow only through the
// plan.
ad::Var scenario_loss(ad::Tape& tape, const planner::PlanVars& vars,
                      const stl::Formula& formula,
                      const ExecutedSamples& executed, const TrainConfig& tc,
                      LossParts* parts);

// Deterministic, collision-resistant seed for scenario b of epoch e.
std::uint64_t scenario_seed(std::uint64_t base, int epoch, int scenario);

struct TrainResult {
  planner::PlannerParams params;
  std::vector<LossParts> curve;  // batch-mean loss per epoch
};

using EpochCallback = std::function<void(int, const LossParts&)>;

// Plan, execute through the safety filter, and descend the scenario losses
// with Adam. When curve_path is nonempty the loss curve is rewritten there
// each epoch as JSONL records {"epoch", "loss", "stl", "ach"}. Throws
// std::runtime_error when the loss or a gradient stops being finite.
TrainResult train(planner::PlannerMode mode, const stl::SpecConfig& spec,
                  const env::EnvConfig& cfg, const TrainConfig& tc,
                  const std::string& curve_path = "",
                  const EpochCallback& on_epoch = nullptr);

}  // namespace stlswarm::train
