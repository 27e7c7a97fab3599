#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlswarm/env/env.hpp"
#include "stlswarm/planner/planner.hpp"
#include "stlswarm/stl/builtin.hpp"
#include "stlswarm/train/train.hpp"

namespace stlswarm::cli {

// Carries every invalid or unknown key found in one pass.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// One run, fully resolved: environment, mission, planner dimensions, loss
// weights, training and evaluation sizes, output directory. Every field has
// a default, so "{}" is a valid config.
struct RunConfig {
  env::EnvConfig env;

  // Mission: a builtin name, or an inline formula with its own table.
  std::string spec_name = "cover";
  std::string spec_formula;  // empty means builtin spec_name
  int plan_steps = 0;        // required with an inline formula
  int goal_interval = 0;
  stl::RegionTable regions;  // empty means the builtin regions

  planner::PlannerMode mode = planner::PlannerMode::kGnnOde;
  int hidden = 64;
  int gnn_layers = 2;
  std::string checkpoint;  // path; used by plan/eval

  double lambda_stl = 1.0;
  double lambda_ach = 0.1;
  double temp = 10.0;

  int train_epochs = 200;
  int train_batch = 8;
  int train_agents = 4;
  double lr = 1e-3;

  int eval_agents = 4;
  int eval_seeds = 30;

  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;

  // Builds the mission this config names; throws ConfigError when the spec
  // block is inconsistent.
  stl::SpecConfig resolve_spec() const;
  train::TrainConfig train_config() const;
};

// Strict parse: unknown keys and out-of-range values are all collected and
// reported together in one ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Canonical serialization: sorted keys, every field present. Parsing it back
// reproduces the config exactly.
std::string canonical_json(const RunConfig& cfg);

// FNV-1a 64-bit over the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Writes resolved_config.json and resolved_config.hash under dir.
void write_resolved_config(const std::string& dir, const RunConfig& cfg);

}  // namespace stlswarm::cli
