#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stlswarm/safety/rollout.hpp"
#include "stlswarm/stl/builtin.hpp"
#include "stlswarm/stl/robustness.hpp"

namespace stlswarm::eval {

struct EpisodeMetrics {
  bool finished = false;  // every agent visited all waypoints and the
                          // visited-position sequence satisfies the mission
  bool safe = false;      // no agent came within 2r of anything while active
  bool success = false;   // finished and safe
  int ttr = -1;           // latest completion step; >= 0 iff success
  double planning_time = 0.0;     // seconds spent producing the plan
  int infeasible_fallbacks = 0;   // braking fallbacks during the rollout
};

// Judges one episode from its raw record. Finish evaluates the mission on
// each agent's positions at its own recorded waypoint-arrival steps (the
// asynchronous reading); a mission whose horizon exceeds the plan can never
// finish. Safety requires pairwise and lidar clearance of 2r at every step up
// to each agent's completion (episode end for agents that never complete).
// planning_time and infeasible_fallbacks are left for the caller. Throws on
// malformed input.
EpisodeMetrics judge_episode(const env::Trajectory& traj,
                             const std::vector<std::vector<int>>& visit_steps,
                             const stl::SpecConfig& spec,
                             const env::EnvConfig& cfg);

struct EpisodeRecord {
  std::uint64_t seed = 0;
  planner::GoalPlan plan;
  std::vector<std::vector<int>> visit_steps;
  env::Trajectory traj;
  EpisodeMetrics metrics;
};

// Deterministic per-episode seed stream.
std::uint64_t episode_seed(std::uint64_t base, int index);

// Who produced the plan for an experiment.
struct PlannerUnderTest {
  std::string name;  // table key, e.g. "gnn_ode", "ode_only", "nominal"
  // Learned planner when set; otherwise the fixed reference schedule.
  const planner::PlannerParams* params = nullptr;
};

struct RunSetup {
  PlannerUnderTest planner;
  stl::SpecConfig spec;
  env::EnvConfig cfg;
  int n_agents = 4;
  std::uint64_t seed_base = 0;
  safety::RolloutConfig rollout;  // use_cbf false for the no-avoidance baseline
  int jobs = 1;
};

// Runs `seeds` independent episodes: sample initial states, plan, execute to
// the evaluation horizon (stopping once every agent finished), judge. The
// parallel path partitions episodes across threads; outputs are identical to
// the serial reference except for measured planning times.
std::vector<EpisodeRecord> run_episodes(const RunSetup& setup, int seeds,
                                        bool parallel);

struct SummaryRow {
  std::string planner;
  std::string spec_name;
  std::string env_name;
  int n_agents = 0;
  int seeds = 0;
  double plan_time_s = 0.0;  // mean
  double finish_pct = 0.0;
  double safety_pct = 0.0;
  double success_pct = 0.0;
  double ttr_steps = 0.0;  // mean over successes; NaN when none succeeded
};

// Pure reduction of the per-episode records.
SummaryRow aggregate(const RunSetup& setup, std::span<const EpisodeRecord> records);

// Header planner,spec,env,N,seeds,plan_time_s,finish_pct,safety_pct,
// success_pct,ttr_steps followed by one line per row.
std::string to_csv(std::span<const SummaryRow> rows);

// One JSON object per line; doubles round trip bit-exactly.
std::string episodes_to_jsonl(std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> episodes_from_jsonl(const std::string& text);

struct ExperimentResult {
  SummaryRow row;
  std::vector<EpisodeRecord> records;
};

ExperimentResult run_experiment(const RunSetup& setup, int seeds,
                                bool parallel = true);

}  // namespace stlswarm::eval
