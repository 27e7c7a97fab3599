#pragma once

#include <filesystem>
#include <string>

#include "stlswarm/env/env.hpp"

namespace stlswarm::env {

struct TrajectoryFile {
  EnvConfig config;
  std::string spec_name;
  Trajectory trajectory;
};

// Line-delimited JSON: a header record carrying the environment config and
// spec name, then one record per step with states and (optionally) actions.
// Serialized doubles round-trip bit-exactly.
std::string trajectory_to_jsonl(const TrajectoryFile& file);
TrajectoryFile trajectory_from_jsonl(const std::string& text);

void save_trajectory(const std::filesystem::path& path, const TrajectoryFile& file);
TrajectoryFile load_trajectory(const std::filesystem::path& path);

}  // namespace stlswarm::env
