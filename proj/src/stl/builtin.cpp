#include "stlswarm/stl/builtin.hpp"

#include <stdexcept>

#include "stlswarm/stl/parser.hpp"

namespace stlswarm::stl {

namespace {

void check_bounds_within(const Formula& f, int plan_steps) {
  if (f.kind == FormulaKind::kEventually || f.kind == FormulaKind::kGlobally ||
      f.kind == FormulaKind::kUntil) {
    if (f.hi > plan_steps) {
      throw std::invalid_argument("temporal bound " + std::to_string(f.hi) +
                                  " exceeds plan_steps " +
                                  std::to_string(plan_steps));
    }
  }
  for (const auto& c : f.children) check_bounds_within(*c, plan_steps);
}

}  // namespace

void SpecConfig::validate() const {
  if (!formula) throw std::invalid_argument("spec has no formula");
  if (plan_steps < 1) throw std::invalid_argument("spec needs plan_steps >= 1");
  if (goal_interval < 1) throw std::invalid_argument("spec needs goal_interval >= 1");
  check_bounds_within(*formula, plan_steps);
}

RegionTable builtin_regions() {
  RegionTable t;
  t["A"] = RegionPredicate{{0.0, 0.0}, 1.0, "A"};
  t["B"] = RegionPredicate{{2.0, 2.0}, 1.0, "B"};
  t["C"] = RegionPredicate{{2.0, 0.0}, 1.0, "C"};
  t["D"] = RegionPredicate{{0.0, 2.0}, 1.0, "D"};
  return t;
}

std::vector<std::string> builtin_spec_names() {
  return {"seq", "cover", "loop", "signal", "branch"};
}

SpecConfig make_spec(const std::string& name, const std::string& formula_text,
                     int plan_steps, int goal_interval, RegionTable regions) {
  SpecConfig cfg;
  cfg.name = name;
  cfg.regions = std::move(regions);
  cfg.formula = parse_spec(formula_text, cfg.regions);
  cfg.plan_steps = plan_steps;
  cfg.goal_interval = goal_interval;
  cfg.validate();
  return cfg;
}

SpecConfig builtin_spec(const std::string& name) {
  const RegionTable regions = builtin_regions();
  if (name == "seq") {
    return make_spec(name, "F[0,5](A) & F[5,10](B) & F[10,15](C)", 15, 20, regions);
  }
  if (name == "cover") {
    return make_spec(name, "F[0,15](A) & F[0,15](B) & F[0,15](C)", 15, 20, regions);
  }
  if (name == "loop") {
    return make_spec(name, "G[0,15](F[0,15](A) & F[0,15](B) & F[0,15](C))", 30, 20,
                     regions);
  }
  if (name == "branch") {
    return make_spec(name, "(F[0,20](A) & F[0,20](B)) | (F[0,20](C) & F[0,20](D))",
                     20, 10, regions);
  }
  if (name == "signal") {
    // Loop through A, B, C until A has been visited twice, and reach D. The
    // "visited twice" side is the counter predicate, which the grammar cannot
    // express, so this one is assembled directly.
    SpecConfig cfg;
    cfg.name = name;
    cfg.regions = regions;
    FormulaPtr loop_body =
        parse_spec("F[0,15](A) & F[0,15](B) & F[0,15](C)", regions);
    FormulaPtr loop_f = make_globally(0, 15, loop_body);
    FormulaPtr twice = make_predicate(VisitCountPredicate{regions.at("A"), 2});
    FormulaPtr reach_d = parse_spec("F[0,30](D)", regions);
    cfg.formula = make_and({make_until(0, 1, loop_f, twice), reach_d});
    cfg.plan_steps = 30;
    cfg.goal_interval = 20;
    cfg.validate();
    return cfg;
  }
  throw std::invalid_argument("unknown spec '" + name +
                              "' (builtins: seq, cover, loop, signal, branch)");
}

}  // namespace stlswarm::stl
