#include "stlswarm/eval/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stlswarm::eval {

namespace {

using nlohmann::json;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

EpisodeRecord run_one(const RunSetup& setup, int index) {
  const std::uint64_t eseed = episode_seed(setup.seed_base, index);
  const std::vector<env::State> init =
      env::sample_initial_states(setup.n_agents, setup.cfg, eseed);

  EpisodeRecord rec;
  rec.seed = eseed;
  const auto start = std::chrono::steady_clock::now();
  if (setup.planner.params != nullptr) {
    rec.plan = planner::plan(*setup.planner.params, init, setup.cfg,
                             setup.spec.plan_steps);
  } else {
    rec.plan = planner::reference_plan(setup.spec, setup.n_agents);
  }
  const auto end = std::chrono::steady_clock::now();

  safety::RolloutConfig rc = setup.rollout;
  rc.stop_when_done = true;
  const safety::RolloutResult rolled =
      safety::rollout(rec.plan, init, setup.cfg, setup.spec.goal_interval,
                      setup.spec.eval_horizon(), rc);
  rec.visit_steps = rolled.visit_steps;
  rec.traj = rolled.traj;
  rec.metrics = judge_episode(rec.traj, rec.visit_steps, setup.spec, setup.cfg);
  rec.metrics.planning_time = std::chrono::duration<double>(end - start).count();
  rec.metrics.infeasible_fallbacks = rolled.infeasible_fallbacks;
  return rec;
}

json trajectory_to_json(const env::Trajectory& traj) {
  json states = json::array();
  for (const auto& step : traj.states) {
    json row = json::array();
    for (const auto& s : step) {
      json vec = json::array();
      for (Eigen::Index d = 0; d < s.size(); ++d) vec.push_back(s(d));
      row.push_back(std::move(vec));
    }
    states.push_back(std::move(row));
  }
  json actions = json::array();
  for (const auto& step : traj.actions) {
    json row = json::array();
    for (const auto& a : step) row.push_back(json::array({a.x(), a.y()}));
    actions.push_back(std::move(row));
  }
  return json{{"dt", traj.dt},
              {"states", std::move(states)},
              {"actions", std::move(actions)}};
}

env::Trajectory trajectory_from_json(const json& j) {
  env::Trajectory traj;
  traj.dt = j.at("dt").get<double>();
  for (const auto& row : j.at("states")) {
    std::vector<env::State> step;
    for (const auto& vec : row) {
      env::State s(vec.size());
      for (std::size_t d = 0; d < vec.size(); ++d) s(d) = vec[d].get<double>();
      step.push_back(std::move(s));
    }
    traj.states.push_back(std::move(step));
  }
  for (const auto& row : j.at("actions")) {
    std::vector<env::Action> step;
    for (const auto& vec : row) {
      if (vec.size() != 2) throw std::runtime_error("action is not planar");
      step.emplace_back(vec[0].get<double>(), vec[1].get<double>());
    }
    traj.actions.push_back(std::move(step));
  }
  return traj;
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t base, int index) {
  return mix(mix(base) ^ static_cast<std::uint64_t>(index));
}

EpisodeMetrics judge_episode(const env::Trajectory& traj,
                             const std::vector<std::vector<int>>& visit_steps,
                             const stl::SpecConfig& spec,
                             const env::EnvConfig& cfg) {
  const int n = traj.n_agents();
  const int steps = traj.steps();
  if (steps < 1) throw std::invalid_argument("trajectory has no states");
  if (static_cast<int>(visit_steps.size()) != n) {
    throw std::invalid_argument("visit records cover " +
                                std::to_string(visit_steps.size()) +
                                " agents, trajectory has " + std::to_string(n));
  }
  const int T = spec.plan_steps;
  for (const auto& v : visit_steps) {
    if (static_cast<int>(v.size()) != T + 1) {
      throw std::invalid_argument("visit records disagree with plan length");
    }
    for (int s : v) {
      if (s >= steps) throw std::invalid_argument("visit step beyond trajectory");
    }
  }
  for (const auto& step : traj.states) {
    if (static_cast<int>(step.size()) != n) {
      throw std::invalid_argument("agent count changes mid-trajectory");
    }
  }

  std::vector<bool> agent_finished(n, false);
  for (int i = 0; i < n; ++i) {
    bool all_visited = true;
    for (int w = 0; w <= T; ++w) all_visited &= visit_steps[i][w] >= 0;
    if (!all_visited) continue;
    stl::Trace visited;
    visited.reserve(T + 1);
    for (int w = 0; w <= T; ++w) {
      visited.push_back(env::position_of(traj.states[visit_steps[i][w]][i]));
    }
    try {
      agent_finished[i] = stl::robustness_exact(*spec.formula, visited, 0) >= 0.0;
    } catch (const stl::HorizonError&) {
      // Mission looks past the plan; it cannot be satisfied by any episode.
      agent_finished[i] = false;
    }
  }

  const double clearance = 2.0 * cfg.agent_radius;
  std::vector<bool> agent_safe(n, true);
  for (int i = 0; i < n; ++i) {
    const int cutoff = agent_finished[i] ? visit_steps[i][T] : steps - 1;
    for (int t = 0; t <= cutoff && agent_safe[i]; ++t) {
      const Eigen::Vector2d p = env::position_of(traj.states[t][i]);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        if ((env::position_of(traj.states[t][j]) - p).norm() < clearance) {
          agent_safe[i] = false;
          break;
        }
      }
      if (agent_safe[i] && !cfg.obstacles.empty()) {
        for (double d :
             env::lidar_scan(p, env::heading_of(traj.states[t][i], cfg), cfg)) {
          if (d < clearance) {
            agent_safe[i] = false;
            break;
          }
        }
      }
    }
  }

  EpisodeMetrics m;
  m.finished = std::all_of(agent_finished.begin(), agent_finished.end(),
                           [](bool b) { return b; });
  m.safe = std::all_of(agent_safe.begin(), agent_safe.end(),
                       [](bool b) { return b; });
  m.success = m.finished && m.safe;
  if (m.success) {
    int worst = 0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, visit_steps[i][T]);
    m.ttr = worst;
  }
  return m;
}

std::vector<EpisodeRecord> run_episodes(const RunSetup& setup, int seeds,
                                        bool parallel) {
  if (seeds < 0) throw std::invalid_argument("seed count must be >= 0");
  if (setup.n_agents < 1) throw std::invalid_argument("need at least one agent");
  setup.spec.validate();
  setup.cfg.validate();
  if (setup.planner.params != nullptr) {
    setup.planner.params->validate(setup.cfg);
  }

  std::vector<EpisodeRecord> out(seeds);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, setup.jobs))
#endif
    for (int e = 0; e < seeds; ++e) out[e] = run_one(setup, e);
  } else {
    for (int e = 0; e < seeds; ++e) out[e] = run_one(setup, e);
  }
  return out;
}

SummaryRow aggregate(const RunSetup& setup,
                     std::span<const EpisodeRecord> records) {
  SummaryRow row;
  row.planner = setup.planner.name;
  row.spec_name = setup.spec.name;
  row.env_name = env::to_string(setup.cfg.kind);
  row.n_agents = setup.n_agents;
  row.seeds = static_cast<int>(records.size());
  if (records.empty()) {
    row.ttr_steps = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  int finished = 0, safe = 0, success = 0;
  double plan_time = 0.0, ttr_sum = 0.0;
  for (const EpisodeRecord& r : records) {
    finished += r.metrics.finished;
    safe += r.metrics.safe;
    success += r.metrics.success;
    plan_time += r.metrics.planning_time;
    if (r.metrics.success) ttr_sum += r.metrics.ttr;
  }
  const double n = static_cast<double>(records.size());
  row.plan_time_s = plan_time / n;
  row.finish_pct = 100.0 * finished / n;
  row.safety_pct = 100.0 * safe / n;
  row.success_pct = 100.0 * success / n;
  row.ttr_steps = success > 0 ? ttr_sum / success
                              : std::numeric_limits<double>::quiet_NaN();
  return row;
}

std::string to_csv(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  out << "planner,spec,env,N,seeds,plan_time_s,finish_pct,safety_pct,"
         "success_pct,ttr_steps\n";
  for (const SummaryRow& r : rows) {
    out << r.planner << ',' << r.spec_name << ',' << r.env_name << ','
        << r.n_agents << ',' << r.seeds << ',' << std::fixed
        << std::setprecision(6) << r.plan_time_s << std::setprecision(2) << ','
        << r.finish_pct << ',' << r.safety_pct << ',' << r.success_pct << ','
        << r.ttr_steps << '\n';
    out.unsetf(std::ios_base::fixed);
  }
  return out.str();
}

std::string episodes_to_jsonl(std::span<const EpisodeRecord> records) {
  std::string out;
  for (const EpisodeRecord& r : records) {
    json plan = json::array();
    for (const auto& agent : r.plan) {
      json row = json::array();
      for (const auto& g : agent) row.push_back(json::array({g.x(), g.y()}));
      plan.push_back(std::move(row));
    }
    const json doc{
        {"seed", r.seed},
        {"plan", std::move(plan)},
        {"visit_steps", r.visit_steps},
        {"trajectory", trajectory_to_json(r.traj)},
        {"metrics",
         {{"finished", r.metrics.finished},
          {"safe", r.metrics.safe},
          {"success", r.metrics.success},
          {"ttr", r.metrics.ttr},
          {"planning_time", r.metrics.planning_time},
          {"infeasible_fallbacks", r.metrics.infeasible_fallbacks}}}};
    out += doc.dump();
    out += '\n';
  }
  return out;
}

std::vector<EpisodeRecord> episodes_from_jsonl(const std::string& text) {
  std::vector<EpisodeRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("episode record line " + std::to_string(line_no) +
                               " is not valid JSON: " + e.what());
    }
    EpisodeRecord r;
    r.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& agent : doc.at("plan")) {
      std::vector<Eigen::Vector2d> goals;
      for (const auto& g : agent) {
        goals.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
      }
      r.plan.push_back(std::move(goals));
    }
    r.visit_steps = doc.at("visit_steps").get<std::vector<std::vector<int>>>();
    r.traj = trajectory_from_json(doc.at("trajectory"));
    const json& m = doc.at("metrics");
    r.metrics.finished = m.at("finished").get<bool>();
    r.metrics.safe = m.at("safe").get<bool>();
    r.metrics.success = m.at("success").get<bool>();
    r.metrics.ttr = m.at("ttr").get<int>();
    r.metrics.planning_time = m.at("planning_time").get<double>();
    r.metrics.infeasible_fallbacks = m.at("infeasible_fallbacks").get<int>();
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentResult run_experiment(const RunSetup& setup, int seeds,
                                bool parallel) {
  ExperimentResult res;
  res.records = run_episodes(setup, seeds, parallel);
  res.row = aggregate(setup, res.records);
  return res;
}

}  // namespace stlswarm::eval
