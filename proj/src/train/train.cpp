#include "stlswarm/train/train.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stlswarm/common/io.hpp"

namespace stlswarm::train {

namespace {

// splitmix64 keeps distinct (epoch, scenario) pairs from colliding even for
// adjacent base seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ScenarioBackward {
  LossParts parts;
  std::vector<Eigen::MatrixXd> grads;  // aligned with named_mutable() order
};

}  // namespace

std::uint64_t scenario_seed(std::uint64_t base, int epoch, int scenario) {
  return mix(mix(mix(base) ^ static_cast<std::uint64_t>(epoch)) ^
             static_cast<std::uint64_t>(scenario));
}

ExecutedSamples sample_executed(const env::Trajectory& traj, int goal_interval,
                                int plan_steps) {
  if (goal_interval < 1 || plan_steps < 0) {
    throw std::invalid_argument("goal interval and plan steps must be positive");
  }
  const int need = goal_interval * plan_steps;
  if (traj.steps() <= need) {
    throw std::invalid_argument(
        "trajectory has " + std::to_string(traj.steps()) + " states, needs " +
        std::to_string(need + 1) + " to sample the plan instants");
  }
  ExecutedSamples out(traj.n_agents());
  for (int i = 0; i < traj.n_agents(); ++i) {
    out[i].reserve(plan_steps + 1);
    for (int t = 0; t <= plan_steps; ++t) {
      out[i].push_back(env::position_of(traj.states[goal_interval * t][i]));
    }
  }
  return out;
}

ad::Var scenario_loss(ad::Tape& tape, const planner::PlanVars& vars,
                      const stl::Formula& formula,
                      const ExecutedSamples& executed, const TrainConfig& tc,
                      LossParts* parts) {
  const std::size_t n = vars.goals.size();
  if (executed.size() != n) {
    throw std::invalid_argument("executed samples cover " +
                                std::to_string(executed.size()) +
                                " agents, plan has " + std::to_string(n));
  }

  ad::Var stl_term = tape.leaf(0.0);
  ad::Var ach_term = tape.leaf(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& goals = vars.goals[i];
    if (executed[i].size() != goals.size()) {
      throw std::invalid_argument("executed samples and plan disagree on length");
    }
    const ad::Var rob =
        stl::robustness_smooth(tape, formula, goals, 0, tc.temp);
    stl_term = tape.add(stl_term, rob);
    for (std::size_t t = 0; t < goals.size(); ++t) {
      const ad::Var target = tape.leaf(Eigen::MatrixXd(executed[i][t]));
      ach_term = tape.add(ach_term, tape.l2_norm(tape.sub(goals[t], target)));
    }
  }
  stl_term = tape.scale(stl_term, -tc.lambda_stl);
  ach_term = tape.scale(ach_term, tc.lambda_ach);
  const ad::Var total = tape.add(stl_term, ach_term);
  if (parts != nullptr) {
    parts->stl = stl_term.value()(0, 0);
    parts->ach = ach_term.value()(0, 0);
    parts->total = total.value()(0, 0);
  }
  return total;
}

TrainResult train(planner::PlannerMode mode, const stl::SpecConfig& spec,
                  const env::EnvConfig& cfg, const TrainConfig& tc,
                  const std::string& curve_path, const EpochCallback& on_epoch) {
  if (tc.epochs < 0 || tc.batch < 1 || tc.n_agents < 1) {
    throw std::invalid_argument("epochs, batch, and n_agents must be positive");
  }
  spec.validate();
  cfg.validate();

  TrainResult result;
  result.params =
      planner::init_params(mode, cfg, tc.seed, tc.hidden, tc.gnn_layers);
  auto slots = result.params.named_mutable();
  std::vector<ad::AdamState> opt(slots.size());

  const int T = spec.plan_steps;
  const int k = spec.goal_interval;
  safety::RolloutConfig rc = tc.rollout;
  rc.stop_when_done = false;

  std::string curve_text;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    std::vector<ScenarioBackward> per(tc.batch);

    // Scenarios are independent given this epoch's parameter snapshot, so
    // they can run in parallel; accumulation below stays in scenario order.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, tc.jobs))
#endif
    for (int b = 0; b < tc.batch; ++b) {
      const std::uint64_t sseed = scenario_seed(tc.seed, epoch, b);
      const std::vector<env::State> init =
          env::sample_initial_states(tc.n_agents, cfg, sseed);

      ad::Tape tape;
      const planner::PlanVars vars =
          planner::plan_on_tape(tape, result.params, init, cfg, T);

      planner::GoalPlan plan(vars.goals.size());
      for (std::size_t i = 0; i < vars.goals.size(); ++i) {
        for (const ad::Var& g : vars.goals[i]) {
          plan[i].emplace_back(g.value()(0, 0), g.value()(1, 0));
        }
      }
      const safety::RolloutResult rolled =
          safety::rollout(plan, init, cfg, k, k * T, rc);
      const ExecutedSamples executed = sample_executed(rolled.traj, k, T);

      const ad::Var loss =
          scenario_loss(tape, vars, *spec.formula, executed, tc, &per[b].parts);
      tape.backward(loss);
      per[b].grads.reserve(vars.param_vars.size());
      for (const auto& [name, v] : vars.param_vars) {
        per[b].grads.push_back(v.grad());
      }
    }

    LossParts mean;
    std::vector<Eigen::MatrixXd> grad(slots.size());
    for (int b = 0; b < tc.batch; ++b) {
      if (per[b].grads.size() != slots.size()) {
        throw std::runtime_error("scenario gradients misaligned with parameters");
      }
      mean.total += per[b].parts.total / tc.batch;
      mean.stl += per[b].parts.stl / tc.batch;
      mean.ach += per[b].parts.ach / tc.batch;
      for (std::size_t p = 0; p < slots.size(); ++p) {
        if (grad[p].size() == 0) {
          grad[p] = per[b].grads[p] / tc.batch;
        } else {
          grad[p] += per[b].grads[p] / tc.batch;
        }
      }
    }

    if (!std::isfinite(mean.total)) {
      throw std::runtime_error("training diverged: epoch " +
                               std::to_string(epoch) + " loss is not finite");
    }
    for (std::size_t p = 0; p < slots.size(); ++p) {
      if (!grad[p].allFinite()) {
        throw std::runtime_error("training diverged: gradient of " +
                                 slots[p].first + " is not finite at epoch " +
                                 std::to_string(epoch));
      }
      ad::adam_step(*slots[p].second, grad[p], opt[p], tc.lr);
    }

    result.curve.push_back(mean);
    if (!curve_path.empty()) {
      std::ostringstream line;
      line << "{\"epoch\": " << epoch << ", \"loss\": " << mean.total
           << ", \"stl\": " << mean.stl << ", \"ach\": " << mean.ach << "}\n";
      curve_text += line.str();
      common::atomic_write_text(curve_path, curve_text);
    }
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace stlswarm::train
