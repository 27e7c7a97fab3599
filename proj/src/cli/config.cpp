#include "stlswarm/cli/config.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "stlswarm/common/io.hpp"
#include "stlswarm/stl/builtin.hpp"
#include "stlswarm/stl/parser.hpp"

namespace stlswarm::cli {

namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}

// Collects every problem instead of stopping at the first, so one pass
// reports all offending keys.
struct Reader {
  std::vector<std::string> problems;

  void flag(const std::string& msg) { problems.push_back(msg); }

  void check_keys(const json& obj, const std::string& prefix,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (const char* a : allowed) known |= key == a;
      if (!known) flag("unknown key " + prefix + key);
    }
  }

  bool object(const json& parent, const std::string& name, json& out) {
    if (!parent.contains(name)) return false;
    if (!parent.at(name).is_object()) {
      flag(name + ": expected an object");
      return false;
    }
    out = parent.at(name);
    return true;
  }

  template <typename T>
  void number(const json& obj, const std::string& prefix, const char* key,
              T& out, double lo, bool lo_strict) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      flag(prefix + key + ": expected a number");
      return;
    }
    const double x = v.get<double>();
    if (lo_strict ? x <= lo : x < lo) {
      flag(prefix + key + ": must be " + (lo_strict ? "> " : ">= ") +
           std::to_string(lo));
      return;
    }
    out = v.get<T>();
  }

  void boolean(const json& obj, const std::string& prefix, const char* key,
               bool& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_boolean()) {
      flag(prefix + key + ": expected a boolean");
      return;
    }
    out = obj.at(key).get<bool>();
  }

  void text(const json& obj, const std::string& prefix, const char* key,
            std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string()) {
      flag(prefix + key + ": expected a string");
      return;
    }
    out = obj.at(key).get<std::string>();
  }

  bool vec2(const json& v, const std::string& where, Eigen::Vector2d& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
      flag(where + ": expected [x, y]");
      return false;
    }
    out = Eigen::Vector2d(v[0].get<double>(), v[1].get<double>());
    return true;
  }
};

json vec2_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)),
      problems_(std::move(problems)) {}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"top level: expected an object"});

  RunConfig cfg;
  Reader r;
  r.check_keys(doc, "",
               {"env", "spec", "planner", "loss", "train", "eval",
                "output_dir", "seed", "jobs"});

  json block;
  if (r.object(doc, "env", block)) {
    r.check_keys(block, "env.",
                 {"kind", "dt", "agent_radius", "sensing_radius", "n_rays",
                  "action_limit", "dubins_v_max", "arena_lo", "arena_hi",
                  "obstacles", "use_rk4"});
    std::string kind;
    r.text(block, "env.", "kind", kind);
    if (!kind.empty()) {
      try {
        cfg.env.kind = env::env_kind_from_string(kind);
      } catch (const std::invalid_argument& e) {
        r.flag(std::string("env.kind: ") + e.what());
      }
    }
    r.number(block, "env.", "dt", cfg.env.dt, 0.0, true);
    r.number(block, "env.", "agent_radius", cfg.env.agent_radius, 0.0, true);
    r.number(block, "env.", "sensing_radius", cfg.env.sensing_radius, 0.0,
             true);
    r.number(block, "env.", "n_rays", cfg.env.n_rays, 1.0, false);
    r.number(block, "env.", "action_limit", cfg.env.action_limit, 0.0, true);
    r.number(block, "env.", "dubins_v_max", cfg.env.dubins_v_max, 0.0, true);
    if (block.contains("arena_lo")) {
      r.vec2(block.at("arena_lo"), "env.arena_lo", cfg.env.arena_lo);
    }
    if (block.contains("arena_hi")) {
      r.vec2(block.at("arena_hi"), "env.arena_hi", cfg.env.arena_hi);
    }
    if (block.contains("obstacles")) {
      if (!block.at("obstacles").is_array()) {
        r.flag("env.obstacles: expected an array");
      } else {
        int idx = 0;
        for (const json& ob : block.at("obstacles")) {
          const std::string where = "env.obstacles[" + std::to_string(idx) + "]";
          env::Circle c;
          bool ok = ob.is_object() && ob.contains("center") &&
                    ob.contains("radius") && ob.at("radius").is_number();
          if (ok) ok = r.vec2(ob.at("center"), where + ".center", c.center);
          if (ok) {
            c.radius = ob.at("radius").get<double>();
            if (c.radius <= 0.0) {
              r.flag(where + ".radius: must be > 0");
              ok = false;
            }
          } else {
            r.flag(where + ": expected {center: [x,y], radius: r}");
          }
          if (ok) cfg.env.obstacles.push_back(c);
          ++idx;
        }
      }
    }
    r.boolean(block, "env.", "use_rk4", cfg.env.use_rk4);
    if (cfg.env.sensing_radius <= 2.0 * cfg.env.agent_radius) {
      r.flag("env.sensing_radius: must exceed twice env.agent_radius");
    }
    if (cfg.env.arena_hi.x() <= cfg.env.arena_lo.x() ||
        cfg.env.arena_hi.y() <= cfg.env.arena_lo.y()) {
      r.flag("env.arena_hi: must exceed env.arena_lo componentwise");
    }
  }

  if (r.object(doc, "spec", block)) {
    r.check_keys(block, "spec.",
                 {"name", "formula", "plan_steps", "goal_interval", "regions"});
    r.text(block, "spec.", "name", cfg.spec_name);
    r.text(block, "spec.", "formula", cfg.spec_formula);
    // zero means unset; required to be >= 1 with an inline formula below
    r.number(block, "spec.", "plan_steps", cfg.plan_steps, 0.0, false);
    r.number(block, "spec.", "goal_interval", cfg.goal_interval, 0.0, false);
    if (block.contains("regions")) {
      if (!block.at("regions").is_object()) {
        r.flag("spec.regions: expected an object of named regions");
      } else {
        for (const auto& [name, reg] : block.at("regions").items()) {
          const std::string where = "spec.regions." + name;
          stl::RegionPredicate p;
          p.name = name;
          bool ok = reg.is_object() && reg.contains("center") &&
                    reg.contains("radius") && reg.at("radius").is_number();
          if (ok) ok = r.vec2(reg.at("center"), where + ".center", p.center);
          if (ok) {
            p.radius = reg.at("radius").get<double>();
            if (p.radius <= 0.0) {
              r.flag(where + ".radius: must be > 0");
              ok = false;
            }
          } else {
            r.flag(where + ": expected {center: [x,y], radius: r}");
          }
          if (ok) cfg.regions.emplace(name, p);
        }
      }
    }
    if (cfg.spec_name.empty()) r.flag("spec.name: must not be empty");
    if (cfg.spec_formula.empty() && !cfg.spec_name.empty()) {
      const auto names = stl::builtin_spec_names();
      if (std::find(names.begin(), names.end(), cfg.spec_name) ==
          names.end()) {
        r.flag("spec.name: '" + cfg.spec_name +
               "' is not a builtin and no formula was given");
      }
    }
    if (!cfg.spec_formula.empty()) {
      if (cfg.plan_steps < 1) {
        r.flag("spec.plan_steps: required with an inline formula");
      }
      if (cfg.goal_interval < 1) {
        r.flag("spec.goal_interval: required with an inline formula");
      }
      try {
        stl::parse_spec(cfg.spec_formula, cfg.regions.empty()
                                              ? stl::builtin_regions()
                                              : cfg.regions);
      } catch (const stl::ParseError& e) {
        r.flag(std::string("spec.formula: ") + e.what());
      }
    }
  }

  if (r.object(doc, "planner", block)) {
    r.check_keys(block, "planner.", {"mode", "hidden", "layers", "checkpoint"});
    std::string mode;
    r.text(block, "planner.", "mode", mode);
    if (!mode.empty()) {
      try {
        cfg.mode = planner::planner_mode_from_string(mode);
      } catch (const std::invalid_argument& e) {
        r.flag(std::string("planner.mode: ") + e.what());
      }
    }
    r.number(block, "planner.", "hidden", cfg.hidden, 1.0, false);
    r.number(block, "planner.", "layers", cfg.gnn_layers, 1.0, false);
    r.text(block, "planner.", "checkpoint", cfg.checkpoint);
  }

  if (r.object(doc, "loss", block)) {
    r.check_keys(block, "loss.", {"lambda_stl", "lambda_ach", "temp"});
    r.number(block, "loss.", "lambda_stl", cfg.lambda_stl, 0.0, false);
    r.number(block, "loss.", "lambda_ach", cfg.lambda_ach, 0.0, false);
    r.number(block, "loss.", "temp", cfg.temp, 0.0, true);
  }

  if (r.object(doc, "train", block)) {
    r.check_keys(block, "train.", {"epochs", "batch", "n_agents", "lr"});
    r.number(block, "train.", "epochs", cfg.train_epochs, 0.0, false);
    r.number(block, "train.", "batch", cfg.train_batch, 1.0, false);
    r.number(block, "train.", "n_agents", cfg.train_agents, 1.0, false);
    r.number(block, "train.", "lr", cfg.lr, 0.0, false);
  }

  if (r.object(doc, "eval", block)) {
    r.check_keys(block, "eval.", {"n_agents", "seeds"});
    r.number(block, "eval.", "n_agents", cfg.eval_agents, 1.0, false);
    r.number(block, "eval.", "seeds", cfg.eval_seeds, 0.0, false);
  }

  if (doc.contains("output_dir")) {
    r.text(doc, "", "output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) r.flag("output_dir: must not be empty");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      r.flag("seed: expected a non-negative integer");
    } else {
      cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
  }
  r.number(doc, "", "jobs", cfg.jobs, 1.0, false);

  if (!r.problems.empty()) throw ConfigError(std::move(r.problems));
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = common::read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("cannot read config: ") + e.what()});
  }
  return parse_run_config(text);
}

stl::SpecConfig RunConfig::resolve_spec() const {
  try {
    if (spec_formula.empty()) return stl::builtin_spec(spec_name);
    return stl::make_spec(spec_name, spec_formula, plan_steps, goal_interval,
                          regions.empty() ? stl::builtin_regions() : regions);
  } catch (const stl::ParseError& e) {
    throw ConfigError({std::string("spec.formula: ") + e.what()});
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("spec: ") + e.what()});
  }
}

train::TrainConfig RunConfig::train_config() const {
  train::TrainConfig tc;
  tc.epochs = train_epochs;
  tc.batch = train_batch;
  tc.n_agents = train_agents;
  tc.lr = lr;
  tc.lambda_stl = lambda_stl;
  tc.lambda_ach = lambda_ach;
  tc.temp = temp;
  tc.seed = seed;
  tc.hidden = hidden;
  tc.gnn_layers = gnn_layers;
  tc.jobs = jobs;
  return tc;
}

std::string canonical_json(const RunConfig& cfg) {
  json obstacles = json::array();
  for (const auto& ob : cfg.env.obstacles) {
    obstacles.push_back(
        {{"center", vec2_json(ob.center)}, {"radius", ob.radius}});
  }
  json regions = json::object();
  for (const auto& [name, reg] : cfg.regions) {
    regions[name] = {{"center", vec2_json(reg.center)},
                     {"radius", reg.radius}};
  }
  const json doc{
      {"env",
       {{"kind", env::to_string(cfg.env.kind)},
        {"dt", cfg.env.dt},
        {"agent_radius", cfg.env.agent_radius},
        {"sensing_radius", cfg.env.sensing_radius},
        {"n_rays", cfg.env.n_rays},
        {"action_limit", cfg.env.action_limit},
        {"dubins_v_max", cfg.env.dubins_v_max},
        {"arena_lo", vec2_json(cfg.env.arena_lo)},
        {"arena_hi", vec2_json(cfg.env.arena_hi)},
        {"obstacles", std::move(obstacles)},
        {"use_rk4", cfg.env.use_rk4}}},
      {"spec",
       {{"name", cfg.spec_name},
        {"formula", cfg.spec_formula},
        {"plan_steps", cfg.plan_steps},
        {"goal_interval", cfg.goal_interval},
        {"regions", std::move(regions)}}},
      {"planner",
       {{"mode", planner::to_string(cfg.mode)},
        {"hidden", cfg.hidden},
        {"layers", cfg.gnn_layers},
        {"checkpoint", cfg.checkpoint}}},
      {"loss",
       {{"lambda_stl", cfg.lambda_stl},
        {"lambda_ach", cfg.lambda_ach},
        {"temp", cfg.temp}}},
      {"train",
       {{"epochs", cfg.train_epochs},
        {"batch", cfg.train_batch},
        {"n_agents", cfg.train_agents},
        {"lr", cfg.lr}}},
      {"eval", {{"n_agents", cfg.eval_agents}, {"seeds", cfg.eval_seeds}}},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs}};
  return doc.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = canonical_json(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_resolved_config(const std::string& dir, const RunConfig& cfg) {
  common::atomic_write_text(dir + "/resolved_config.json", canonical_json(cfg));
  common::atomic_write_text(dir + "/resolved_config.hash",
                            config_hash(cfg) + "\n");
}

}  // namespace stlswarm::cli
