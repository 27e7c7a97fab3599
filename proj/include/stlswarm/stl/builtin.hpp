#pragma once

#include <string>
#include <vector>

#include "stlswarm/stl/formula.hpp"

namespace stlswarm::stl {

// A mission: formula over plan steps [0, T], goal sampling interval k in
// simulation steps, and the evaluation horizon 5kT.
struct SpecConfig {
  std::string name;
  FormulaPtr formula;
  int plan_steps = 0;     // T
  int goal_interval = 0;  // k
  RegionTable regions;

  int eval_horizon() const { return 5 * goal_interval * plan_steps; }
  void validate() const;  // throws when bounds exceed T or T, k < 1
};

// Workspace regions shared by the builtin missions: unit-L1 balls at
// A=(0,0), B=(2,2), C=(2,0), D=(0,2).
RegionTable builtin_regions();

// Builtin mission names: seq, cover, loop, signal, branch.
std::vector<std::string> builtin_spec_names();
SpecConfig builtin_spec(const std::string& name);

// Custom mission from a formula source string.
SpecConfig make_spec(const std::string& name, const std::string& formula_text,
                     int plan_steps, int goal_interval, RegionTable regions);

}  // namespace stlswarm::stl
