// Command-line front end: monitor a trajectory against a mission, train a
// planner, plan from a states file, evaluate over seeded episodes, or list
// the builtin missions.
//
// Exit codes: 0 success, 1 runtime failure (including a violated monitor
// verdict), 2 input error (bad arguments, bad config, horizon too short).

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>

#include "stlswarm/cli/config.hpp"
#include "stlswarm/common/io.hpp"
#include "stlswarm/env/trajectory_io.hpp"
#include "stlswarm/eval/eval.hpp"
#include "stlswarm/planner/planner.hpp"
#include "stlswarm/stl/builtin.hpp"
#include "stlswarm/stl/parser.hpp"
#include "stlswarm/stl/robustness.hpp"
#include "stlswarm/train/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace stlswarm;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

// STLSWARM_SEED overrides the config seed for every command that takes a
// config; the resolved config written next to the outputs reflects it.
void apply_overrides(cli::RunConfig& rc, int jobs_flag) {
  if (const char* env_seed = std::getenv("STLSWARM_SEED")) {
    std::uint64_t parsed = 0;
    const std::string s = env_seed;
    const auto [ptr, ec] =
        std::from_chars(s.data(), s.data() + s.size(), parsed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw cli::ConfigError(
          {"STLSWARM_SEED: expected a non-negative integer, got '" + s + "'"});
    }
    rc.seed = parsed;
  }
  if (jobs_flag > 0) rc.jobs = jobs_flag;
}

// A spec argument is either a builtin mission name or a config file path.
stl::SpecConfig spec_from_arg(const std::string& arg) {
  if (fs::exists(arg)) return cli::load_run_config(arg).resolve_spec();
  return stl::builtin_spec(arg);
}

int cmd_monitor(const std::string& spec_arg, const std::string& traj_path) {
  const stl::SpecConfig spec = spec_from_arg(spec_arg);
  const env::TrajectoryFile tf = env::load_trajectory(traj_path);
  if (tf.trajectory.steps() == 0) {
    throw std::invalid_argument("trajectory file holds no states");
  }

  const int n = tf.trajectory.n_agents();
  bool all_sat = true;
  for (int i = 0; i < n; ++i) {
    stl::Trace trace;
    trace.reserve(tf.trajectory.states.size());
    for (const auto& step_states : tf.trajectory.states) {
      trace.push_back(env::position_of(step_states[i]));
    }
    const double rob = stl::robustness_exact(*spec.formula, trace, 0);
    const bool sat = stl::boolean_sat(*spec.formula, trace, 0);
    all_sat &= sat;
    std::cout << "agent " << i << ": robustness " << rob << "  "
              << (sat ? "satisfied" : "violated") << "\n";
  }
  std::cout << "spec " << spec.name << ": "
            << (all_sat ? "all agents satisfied" : "violated") << "\n";
  return all_sat ? kExitOk : kExitRuntime;
}

int cmd_train(const std::string& config_path, int jobs_flag) {
  cli::RunConfig rc = cli::load_run_config(config_path);
  apply_overrides(rc, jobs_flag);
  const stl::SpecConfig spec = rc.resolve_spec();

  fs::create_directories(rc.output_dir);
  cli::write_resolved_config(rc.output_dir, rc);

  train::TrainConfig tc = rc.train_config();
  const int every = std::max(1, tc.epochs / 10);
  const auto t0 = std::chrono::steady_clock::now();
  const train::TrainResult result = train::train(
      rc.mode, spec, rc.env, tc, rc.output_dir + "/curve.jsonl",
      [&](int epoch, const train::LossParts& parts) {
        if (epoch % every == 0 || epoch == tc.epochs - 1) {
          std::cout << "epoch " << epoch << "  loss " << parts.total
                    << "  stl " << parts.stl << "  ach " << parts.ach << "\n";
        }
      });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const std::string ck_path = rc.output_dir + "/checkpoint.json";
  planner::save_checkpoint(ck_path, result.params, cli::config_hash(rc));
  std::cout << "trained " << planner::to_string(rc.mode) << " on "
            << spec.name << " for " << tc.epochs << " epochs in " << secs
            << " s\ncheckpoint: " << ck_path << "\n";
  return kExitOk;
}

int cmd_plan(const std::string& config_path, const std::string& ck_path,
             const std::string& states_path, int jobs_flag) {
  cli::RunConfig rc = cli::load_run_config(config_path);
  apply_overrides(rc, jobs_flag);
  const stl::SpecConfig spec = rc.resolve_spec();
  const planner::PlannerParams params = planner::load_checkpoint(ck_path);

  const env::TrajectoryFile tf = env::load_trajectory(states_path);
  if (tf.trajectory.steps() == 0) {
    throw std::invalid_argument("states file holds no states");
  }
  const std::vector<env::State>& states = tf.trajectory.states.front();
  if (static_cast<int>(states.front().size()) != rc.env.state_dim()) {
    throw cli::ConfigError(
        {"states file dimension does not match env.kind " +
         env::to_string(rc.env.kind)});
  }

  // warm pass, then the timed pass reported to the user
  planner::plan(params, states, rc.env, spec.plan_steps);
  const auto t0 = std::chrono::steady_clock::now();
  const planner::GoalPlan goals =
      planner::plan(params, states, rc.env, spec.plan_steps);
  const double ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - t0)
          .count();

  fs::create_directories(rc.output_dir);
  cli::write_resolved_config(rc.output_dir, rc);
  nlohmann::json doc;
  doc["spec"] = spec.name;
  doc["plan_steps"] = spec.plan_steps;
  doc["planner"] = planner::to_string(params.mode);
  auto& agents = doc["goals"] = nlohmann::json::array();
  for (const auto& agent_goals : goals) {
    nlohmann::json seq = nlohmann::json::array();
    for (const auto& g : agent_goals) {
      seq.push_back(nlohmann::json::array({g.x(), g.y()}));
    }
    agents.push_back(std::move(seq));
  }
  const std::string plan_path = rc.output_dir + "/plan.json";
  common::atomic_write_text(plan_path, doc.dump(2) + "\n");

  std::cout << "planned " << goals.size() << " agents, " << spec.plan_steps
            << " steps in " << ms << " ms\nplan: " << plan_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& ck_path,
             const std::string& baseline, int jobs_flag) {
  cli::RunConfig rc = cli::load_run_config(config_path);
  apply_overrides(rc, jobs_flag);

  eval::RunSetup setup;
  setup.spec = rc.resolve_spec();
  setup.cfg = rc.env;
  setup.n_agents = rc.eval_agents;
  setup.seed_base = rc.seed;
  setup.jobs = rc.jobs;

  planner::PlannerParams params;
  if (baseline == "nominal") {
    setup.planner.name = "nominal";
    setup.rollout.use_cbf = false;
  } else if (baseline == "ode" || baseline.empty()) {
    const std::string path = !ck_path.empty() ? ck_path : rc.checkpoint;
    if (path.empty()) {
      throw cli::ConfigError({"planner.checkpoint: required unless "
                              "--baseline nominal is given"});
    }
    params = planner::load_checkpoint(path);
    if (baseline == "ode" && params.mode != planner::PlannerMode::kOdeOnly) {
      throw cli::ConfigError(
          {"--baseline ode needs an ode_only checkpoint, got " +
           planner::to_string(params.mode)});
    }
    setup.planner.name = planner::to_string(params.mode);
    setup.planner.params = &params;
  } else {
    throw cli::ConfigError({"--baseline: expected nominal or ode, got '" +
                            baseline + "'"});
  }

  const eval::ExperimentResult result =
      eval::run_experiment(setup, rc.eval_seeds, rc.jobs > 1);
  const std::string csv =
      eval::to_csv(rc.eval_seeds == 0
                       ? std::span<const eval::SummaryRow>{}
                       : std::span<const eval::SummaryRow>{&result.row, 1});

  fs::create_directories(rc.output_dir);
  cli::write_resolved_config(rc.output_dir, rc);
  common::atomic_write_text(rc.output_dir + "/results.csv", csv);
  common::atomic_write_text(rc.output_dir + "/episodes.jsonl",
                            eval::episodes_to_jsonl(result.records));
  std::cout << csv;
  return kExitOk;
}

int cmd_specs() {
  for (const std::string& name : stl::builtin_spec_names()) {
    const stl::SpecConfig spec = stl::builtin_spec(name);
    std::cout << name << ": T=" << spec.plan_steps
              << " k=" << spec.goal_interval
              << " horizon=" << spec.eval_horizon() << "  "
              << stl::to_string(*spec.formula) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent STL mission planning toolkit"};
  app.require_subcommand(1);

  std::string spec_arg, traj_arg, config_arg, ck_arg, states_arg, baseline_arg;
  int jobs_flag = 0;

  CLI::App* monitor =
      app.add_subcommand("monitor", "robustness of a trajectory on a mission");
  monitor->add_option("spec", spec_arg, "builtin mission name or config file")
      ->required();
  monitor->add_option("trajectory", traj_arg, "trajectory file (jsonl)")
      ->required();

  CLI::App* train_cmd =
      app.add_subcommand("train", "train a planner from a config");
  train_cmd->add_option("--config", config_arg, "run config (json)")
      ->required();
  train_cmd->add_option("--jobs", jobs_flag, "worker cap");

  CLI::App* plan_cmd =
      app.add_subcommand("plan", "plan waypoints from a states file");
  plan_cmd->add_option("--config", config_arg, "run config (json)")
      ->required();
  plan_cmd->add_option("--checkpoint", ck_arg, "planner checkpoint")
      ->required();
  plan_cmd->add_option("--states", states_arg, "trajectory file; step 0 used")
      ->required();
  plan_cmd->add_option("--jobs", jobs_flag, "worker cap");

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "seeded episode evaluation to a metrics table");
  eval_cmd->add_option("--config", config_arg, "run config (json)")
      ->required();
  eval_cmd->add_option("--checkpoint", ck_arg, "planner checkpoint");
  eval_cmd->add_option("--baseline", baseline_arg,
                       "nominal (PID, no avoidance) or ode (ode_only ckpt)");
  eval_cmd->add_option("--jobs", jobs_flag, "worker cap");

  CLI::App* specs_cmd = app.add_subcommand("specs", "list builtin missions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (monitor->parsed()) return cmd_monitor(spec_arg, traj_arg);
    if (train_cmd->parsed()) return cmd_train(config_arg, jobs_flag);
    if (plan_cmd->parsed()) {
      return cmd_plan(config_arg, ck_arg, states_arg, jobs_flag);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(config_arg, ck_arg, baseline_arg, jobs_flag);
    }
    if (specs_cmd->parsed()) return cmd_specs();
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const stl::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const stl::HorizonError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}
