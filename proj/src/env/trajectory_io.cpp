#include "stlswarm/env/trajectory_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "stlswarm/common/io.hpp"

namespace stlswarm::env {

using nlohmann::json;

namespace {

json config_to_json(const EnvConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["dt"] = c.dt;
  j["agent_radius"] = c.agent_radius;
  j["sensing_radius"] = c.sensing_radius;
  j["n_rays"] = c.n_rays;
  j["action_limit"] = c.action_limit;
  j["dubins_v_max"] = c.dubins_v_max;
  j["arena"] = {{c.arena_lo.x(), c.arena_lo.y()}, {c.arena_hi.x(), c.arena_hi.y()}};
  j["use_rk4"] = c.use_rk4;
  j["obstacles"] = json::array();
  for (const auto& o : c.obstacles) {
    j["obstacles"].push_back({{"center", {o.center.x(), o.center.y()}},
                              {"radius", o.radius}});
  }
  return j;
}

EnvConfig config_from_json(const json& j) {
  EnvConfig c;
  c.kind = env_kind_from_string(j.at("kind").get<std::string>());
  c.dt = j.at("dt").get<double>();
  c.agent_radius = j.at("agent_radius").get<double>();
  c.sensing_radius = j.at("sensing_radius").get<double>();
  c.n_rays = j.at("n_rays").get<int>();
  c.action_limit = j.at("action_limit").get<double>();
  c.dubins_v_max = j.at("dubins_v_max").get<double>();
  c.arena_lo = {j.at("arena")[0][0].get<double>(), j.at("arena")[0][1].get<double>()};
  c.arena_hi = {j.at("arena")[1][0].get<double>(), j.at("arena")[1][1].get<double>()};
  c.use_rk4 = j.at("use_rk4").get<bool>();
  for (const auto& o : j.at("obstacles")) {
    c.obstacles.push_back(Circle{{o.at("center")[0].get<double>(),
                                  o.at("center")[1].get<double>()},
                                 o.at("radius").get<double>()});
  }
  c.validate();
  return c;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

std::string trajectory_to_jsonl(const TrajectoryFile& file) {
  std::ostringstream os;
  json header;
  header["env"] = config_to_json(file.config);
  header["spec"] = file.spec_name;
  os << header.dump() << "\n";
  const bool with_actions = !file.trajectory.actions.empty();
  if (with_actions &&
      file.trajectory.actions.size() + 1 != file.trajectory.states.size()) {
    throw std::invalid_argument("trajectory needs one fewer action row than states");
  }
  for (std::size_t t = 0; t < file.trajectory.states.size(); ++t) {
    json rec;
    rec["t"] = t;
    rec["states"] = json::array();
    for (const auto& s : file.trajectory.states[t]) {
      rec["states"].push_back(vector_to_json(s));
    }
    if (with_actions && t + 1 < file.trajectory.states.size()) {
      rec["actions"] = json::array();
      for (const auto& a : file.trajectory.actions[t]) {
        rec["actions"].push_back(vector_to_json(a));
      }
    }
    os << rec.dump() << "\n";
  }
  return os.str();
}

TrajectoryFile trajectory_from_jsonl(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("trajectory file is empty");
  }
  TrajectoryFile out;
  json header = json::parse(line);
  out.config = config_from_json(header.at("env"));
  out.spec_name = header.value("spec", "");
  out.trajectory.dt = out.config.dt;

  const int dim = out.config.state_dim();
  int expected_agents = -1;
  long expected_t = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (rec.at("t").get<long>() != expected_t) {
      throw std::invalid_argument("trajectory records out of order at t=" +
                                  std::to_string(expected_t));
    }
    ++expected_t;
    std::vector<State> states;
    for (const auto& s : rec.at("states")) {
      if (static_cast<int>(s.size()) != dim) {
        throw std::invalid_argument("state dimension mismatch in trajectory");
      }
      State x(dim);
      for (int i = 0; i < dim; ++i) x(i) = s[i].get<double>();
      states.push_back(std::move(x));
    }
    if (expected_agents < 0) expected_agents = static_cast<int>(states.size());
    if (static_cast<int>(states.size()) != expected_agents) {
      throw std::invalid_argument("agent count varies across trajectory records");
    }
    out.trajectory.states.push_back(std::move(states));
    if (rec.contains("actions")) {
      std::vector<Action> actions;
      for (const auto& a : rec.at("actions")) {
        actions.push_back(Action{a[0].get<double>(), a[1].get<double>()});
      }
      if (static_cast<int>(actions.size()) != expected_agents) {
        throw std::invalid_argument("action count varies across trajectory records");
      }
      out.trajectory.actions.push_back(std::move(actions));
    }
  }
  if (out.trajectory.states.empty()) {
    throw std::invalid_argument("trajectory has no step records");
  }
  if (!out.trajectory.actions.empty() &&
      out.trajectory.actions.size() + 1 != out.trajectory.states.size()) {
    throw std::invalid_argument("trajectory actions do not align with states");
  }
  return out;
}

void save_trajectory(const std::filesystem::path& path, const TrajectoryFile& file) {
  common::atomic_write_text(path, trajectory_to_jsonl(file));
}

TrajectoryFile load_trajectory(const std::filesystem::path& path) {
  return trajectory_from_jsonl(common::read_text(path));
}

}  // namespace stlswarm::env
