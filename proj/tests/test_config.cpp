#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "stlswarm/cli/config.hpp"
#include "stlswarm/common/io.hpp"

using namespace stlswarm;

namespace {

std::string contains_all(const std::vector<std::string>& problems,
                         const std::vector<std::string>& needles) {
  for (const auto& n : needles) {
    bool found = false;
    for (const auto& p : problems) found |= p.find(n) != std::string::npos;
    if (!found) return "missing problem mentioning: " + n;
  }
  return "";
}

}  // namespace

TEST_CASE("empty object yields the default config") {
  const cli::RunConfig cfg = cli::parse_run_config("{}");
  CHECK(cfg.spec_name == "cover");
  CHECK(cfg.spec_formula.empty());
  CHECK(cfg.mode == planner::PlannerMode::kGnnOde);
  CHECK(cfg.hidden == 64);
  CHECK(cfg.train_epochs == 200);
  CHECK(cfg.eval_seeds == 30);
  CHECK(cfg.env.kind == env::EnvKind::kSingleIntegrator);
  CHECK(cfg.seed == 0);
  CHECK(cfg.jobs == 1);
}

TEST_CASE("full config round trips through its canonical form") {
  const std::string text = R"json({
    "env": {"kind": "dubins", "dt": 0.05, "n_rays": 16,
            "obstacles": [{"center": [1.0, 1.5], "radius": 0.2}]},
    "spec": {"name": "ring", "formula": "F[0,4](A) & G[0,4](!B)",
             "plan_steps": 4, "goal_interval": 7,
             "regions": {"A": {"center": [0, 0], "radius": 1},
                         "B": {"center": [2, 2], "radius": 0.5}}},
    "planner": {"mode": "ode_only", "hidden": 32, "layers": 1,
                "checkpoint": "ck.json"},
    "loss": {"lambda_stl": 2.0, "lambda_ach": 0.0, "temp": 50.0},
    "train": {"epochs": 10, "batch": 4, "n_agents": 2, "lr": 0.01},
    "eval": {"n_agents": 6, "seeds": 12},
    "output_dir": "runs/x",
    "seed": 99,
    "jobs": 3
  })json";
  const cli::RunConfig cfg = cli::parse_run_config(text);
  CHECK(cfg.env.kind == env::EnvKind::kDubins);
  CHECK(cfg.env.dt == 0.05);
  CHECK(cfg.env.n_rays == 16);
  CHECK(cfg.env.obstacles.size() == 1);
  CHECK(cfg.spec_name == "ring");
  CHECK(cfg.plan_steps == 4);
  CHECK(cfg.goal_interval == 7);
  CHECK(cfg.regions.size() == 2);
  CHECK(cfg.mode == planner::PlannerMode::kOdeOnly);
  CHECK(cfg.hidden == 32);
  CHECK(cfg.checkpoint == "ck.json");
  CHECK(cfg.lambda_ach == 0.0);
  CHECK(cfg.temp == 50.0);
  CHECK(cfg.train_epochs == 10);
  CHECK(cfg.eval_agents == 6);
  CHECK(cfg.output_dir == "runs/x");
  CHECK(cfg.seed == 99);
  CHECK(cfg.jobs == 3);

  // canonical -> parse -> canonical is a fixed point
  const std::string canon = cli::canonical_json(cfg);
  const cli::RunConfig back = cli::parse_run_config(canon);
  CHECK(cli::canonical_json(back) == canon);
  CHECK(cli::config_hash(back) == cli::config_hash(cfg));
}

TEST_CASE("hash is stable and sensitive") {
  const cli::RunConfig a = cli::parse_run_config("{}");
  const cli::RunConfig b = cli::parse_run_config("{}");
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  CHECK(cli::config_hash(a).size() == 16);

  cli::RunConfig c = a;
  c.seed = 1;
  CHECK(cli::config_hash(c) != cli::config_hash(a));
  cli::RunConfig d = a;
  d.temp = 10.0 + 1e-12;
  CHECK(cli::config_hash(d) != cli::config_hash(a));
}

TEST_CASE("validation reports every offending key at once") {
  const std::string text = R"json({
    "env": {"dt": -1, "warp": 3},
    "train": {"batch": 0},
    "bogus": 1,
    "jobs": 0
  })json";
  try {
    cli::parse_run_config(text);
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    const std::string missing = contains_all(
        e.problems(), {"env.dt", "env.warp", "train.batch", "bogus", "jobs"});
    CHECK_MESSAGE(missing.empty(), missing);
    CHECK(e.problems().size() >= 5);
    // the what() string mentions each problem too
    const std::string what = e.what();
    CHECK(what.find("env.warp") != std::string::npos);
    CHECK(what.find("train.batch") != std::string::npos);
  }
}

TEST_CASE("malformed json and non-object top level are rejected") {
  CHECK_THROWS_AS(cli::parse_run_config("{nope"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config("[1,2]"), cli::ConfigError);
}

TEST_CASE("bad enum values and bad formulas are reported") {
  try {
    cli::parse_run_config(
        R"json({"env": {"kind": "hovercraft"},
            "planner": {"mode": "magic"},
            "spec": {"formula": "F[0,3](", "plan_steps": 3,
                     "goal_interval": 5}})json");
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    const std::string missing = contains_all(
        e.problems(), {"env.kind", "planner.mode", "spec.formula"});
    CHECK_MESSAGE(missing.empty(), missing);
  }
}

TEST_CASE("inline formula requires plan_steps and goal_interval") {
  try {
    cli::parse_run_config(R"json({"spec": {"formula": "F[0,3](A)"}})json");
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    const std::string missing =
        contains_all(e.problems(), {"plan_steps", "goal_interval"});
    CHECK_MESSAGE(missing.empty(), missing);
  }
}

TEST_CASE("unknown builtin name without a formula is caught at parse time") {
  CHECK_THROWS_AS(cli::parse_run_config(R"json({"spec": {"name": "nope"}})json"),
                  cli::ConfigError);
}

TEST_CASE("resolve_spec builds builtins and inline missions") {
  const cli::RunConfig base = cli::parse_run_config("{}");
  const stl::SpecConfig cover = base.resolve_spec();
  CHECK(cover.name == "cover");
  CHECK(cover.plan_steps == 15);

  const cli::RunConfig inline_cfg = cli::parse_run_config(
      R"json({"spec": {"name": "mini", "formula": "F[0,2](A)",
                   "plan_steps": 2, "goal_interval": 3}})json");
  const stl::SpecConfig mini = inline_cfg.resolve_spec();
  CHECK(mini.name == "mini");
  CHECK(mini.plan_steps == 2);
  CHECK(mini.goal_interval == 3);
  CHECK(mini.eval_horizon() == 5 * 2 * 3);
}

TEST_CASE("custom regions replace the builtin table") {
  const cli::RunConfig cfg = cli::parse_run_config(
      R"json({"spec": {"name": "solo", "formula": "F[0,2](Z)",
                   "plan_steps": 2, "goal_interval": 3,
                   "regions": {"Z": {"center": [5, 5], "radius": 0.4}}}})json");
  const stl::SpecConfig spec = cfg.resolve_spec();
  CHECK(spec.regions.count("Z") == 1);
  CHECK(spec.regions.at("Z").center.x() == 5.0);

  // a formula naming a region absent from the custom table fails
  CHECK_THROWS_AS(cli::parse_run_config(
                      R"json({"spec": {"name": "solo", "formula": "F[0,2](A)",
                                   "plan_steps": 2, "goal_interval": 3,
                                   "regions": {"Z": {"center": [5, 5],
                                                     "radius": 0.4}}}})json"),
                  cli::ConfigError);
}

TEST_CASE("train_config copies the training fields") {
  cli::RunConfig cfg = cli::parse_run_config(
      R"json({"train": {"epochs": 7, "batch": 3, "n_agents": 5, "lr": 0.5},
          "loss": {"temp": 2.0}, "seed": 11, "jobs": 2,
          "planner": {"hidden": 16, "layers": 1}})json");
  const train::TrainConfig tc = cfg.train_config();
  CHECK(tc.epochs == 7);
  CHECK(tc.batch == 3);
  CHECK(tc.n_agents == 5);
  CHECK(tc.lr == 0.5);
  CHECK(tc.temp == 2.0);
  CHECK(tc.seed == 11);
  CHECK(tc.jobs == 2);
  CHECK(tc.hidden == 16);
  CHECK(tc.gnn_layers == 1);
}

TEST_CASE("write_resolved_config emits matching json and hash") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "stlswarm_cfg_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const cli::RunConfig cfg = cli::parse_run_config(R"json({"seed": 5})json");
  cli::write_resolved_config(dir.string(), cfg);

  const std::string json_text = common::read_text(dir / "resolved_config.json");
  const std::string hash_text = common::read_text(dir / "resolved_config.hash");
  CHECK(json_text == cli::canonical_json(cfg));
  CHECK(hash_text == cli::config_hash(cfg) + "\n");
  // the written file parses back to the same hash
  const cli::RunConfig back = cli::parse_run_config(json_text);
  CHECK(cli::config_hash(back) == cli::config_hash(cfg));
  fs::remove_all(dir);
}

TEST_CASE("load_run_config reads files and reports missing ones") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "stlswarm_cfg_load.json";
  {
    std::ofstream out(p);
    out << R"json({"seed": 3})json";
  }
  CHECK(cli::load_run_config(p.string()).seed == 3);
  fs::remove(p);
  CHECK_THROWS_AS(cli::load_run_config(p.string()), cli::ConfigError);
}
