#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stlswarm/ad/tape.hpp"
#include "stlswarm/graph/graph.hpp"
#include "stlswarm/stl/builtin.hpp"

namespace stlswarm::planner {

enum class PlannerMode { kGnnOde, kOdeOnly };

std::string to_string(PlannerMode m);
PlannerMode planner_mode_from_string(const std::string& s);

struct Mlp {
  Eigen::MatrixXd w1, b1, w2, b2;  // biases are column vectors
};

struct GnnLayer {
  Mlp edge;  // [h_src; h_dst; e_ij] -> message
  Mlp node;  // [h_self; mean incoming] -> updated embedding
};

// The whole parameter set. gnn_ode runs message passing and reads the initial
// goal from [embedding; position]; ode_only reads it from the position alone,
// so each agent's plan ignores every other agent. Both then unroll the same
// learned increment map g_t = g_{t-1} + f(g_{t-1}).
struct PlannerParams {
  PlannerMode mode = PlannerMode::kGnnOde;
  int hidden = 64;
  Eigen::MatrixXd embed_w, embed_b;  // one-hot node features -> hidden
  std::vector<GnnLayer> layers;
  Mlp readout;
  Mlp ode;

  void validate(const env::EnvConfig& cfg) const;
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> named() const;
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_mutable();
};

// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), seeded.
PlannerParams init_params(PlannerMode mode, const env::EnvConfig& cfg,
                          std::uint64_t seed, int hidden = 64, int layers = 2);

// goals[agent][t] for t = 0..T.
using GoalPlan = std::vector<std::vector<Eigen::Vector2d>>;

// Differentiable plan: parameters and outputs live on the tape.
struct PlanVars {
  std::vector<std::pair<std::string, ad::Var>> param_vars;
  std::vector<std::vector<ad::Var>> goals;  // [agent][t], 2x1 each
};

PlanVars plan_on_tape(ad::Tape& tape, const PlannerParams& params,
                      const std::vector<env::State>& states,
                      const env::EnvConfig& cfg, int plan_steps);

GoalPlan plan(const PlannerParams& params, const std::vector<env::State>& states,
              const env::EnvConfig& cfg, int plan_steps);

// Mean seconds per plan over `repetitions` fresh forward passes (graph
// construction included, I/O excluded).
double inference_time(const PlannerParams& params,
                      const std::vector<env::State>& states,
                      const env::EnvConfig& cfg, int plan_steps,
                      int repetitions);

// Checkpoints carry every named array, the mode/dimensions, and the config
// hash of the run that produced them; loading verifies shapes.
void save_checkpoint(const std::string& path, const PlannerParams& params,
                     const std::string& config_hash);
PlannerParams load_checkpoint(const std::string& path,
                              std::string* config_hash = nullptr);

// Deterministic spec-derived waypoint schedule shared by every agent: region
// centers held over window-aligned spans. This is what the no-avoidance
// baseline tracks.
GoalPlan reference_plan(const stl::SpecConfig& spec, int n_agents);

}  // namespace stlswarm::planner
