#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stlswarm/stl/builtin.hpp"
#include "stlswarm/stl/parser.hpp"
#include "stlswarm/stl/robustness.hpp"
#include "stlswarm/stl/smooth.hpp"

using namespace stlswarm;
using stl::Formula;
using stl::FormulaKind;
using stl::FormulaPtr;
using stl::Trace;

namespace {

// Independent reference semantics: every min/max spelled out as loops and the
// until prefix recomputed from scratch for each t'. Kept deliberately naive.
double naive_rob(const Formula& f, const Trace& tr, int t) {
  switch (f.kind) {
    case FormulaKind::kPredicate: {
      if (const auto* r = std::get_if<stl::RegionPredicate>(&f.pred)) {
        const double l1 = std::abs(tr[t].x() - r->center.x()) +
                          std::abs(tr[t].y() - r->center.y());
        return r->radius - l1;
      }
      if (const auto* h = std::get_if<stl::HalfplanePredicate>(&f.pred)) {
        return h->normal.x() * tr[t].x() + h->normal.y() * tr[t].y() - h->offset;
      }
      const auto& v = std::get<stl::VisitCountPredicate>(f.pred);
      int count = 0;
      bool prev = false;
      for (int u = 0; u <= t; ++u) {
        const double l1 = std::abs(tr[u].x() - v.region.center.x()) +
                          std::abs(tr[u].y() - v.region.center.y());
        const bool in = l1 <= v.region.radius;
        if (in && !prev) ++count;
        prev = in;
      }
      return count >= v.required ? 1.0 : -1.0;
    }
    case FormulaKind::kNot:
      return -naive_rob(*f.children[0], tr, t);
    case FormulaKind::kAnd: {
      double v = naive_rob(*f.children[0], tr, t);
      for (std::size_t i = 1; i < f.children.size(); ++i) {
        v = std::min(v, naive_rob(*f.children[i], tr, t));
      }
      return v;
    }
    case FormulaKind::kOr: {
      double v = naive_rob(*f.children[0], tr, t);
      for (std::size_t i = 1; i < f.children.size(); ++i) {
        v = std::max(v, naive_rob(*f.children[i], tr, t));
      }
      return v;
    }
    case FormulaKind::kImplies:
      return std::max(-naive_rob(*f.children[0], tr, t),
                      naive_rob(*f.children[1], tr, t));
    case FormulaKind::kEventually: {
      double v = naive_rob(*f.children[0], tr, t + f.lo);
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        v = std::max(v, naive_rob(*f.children[0], tr, u));
      }
      return v;
    }
    case FormulaKind::kGlobally: {
      double v = naive_rob(*f.children[0], tr, t + f.lo);
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        v = std::min(v, naive_rob(*f.children[0], tr, u));
      }
      return v;
    }
    case FormulaKind::kUntil: {
      double best = -1e300;
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        double prefix = 1e300;
        for (int w = t; w <= u; ++w) {
          prefix = std::min(prefix, naive_rob(*f.children[0], tr, w));
        }
        best = std::max(best, std::min(naive_rob(*f.children[1], tr, u), prefix));
      }
      return best;
    }
  }
  return 0.0;
}

// Reference boolean semantics written without robustness values.
bool naive_sat(const Formula& f, const Trace& tr, int t) {
  switch (f.kind) {
    case FormulaKind::kPredicate:
      return naive_rob(f, tr, t) >= 0.0;
    case FormulaKind::kNot:
      // Ties count as satisfied on both sides of a negation, mirroring the
      // quantitative convention rho >= 0.
      return -naive_rob(*f.children[0], tr, t) >= 0.0;
    case FormulaKind::kAnd:
      for (const auto& c : f.children) {
        if (!naive_sat(*c, tr, t)) return false;
      }
      return true;
    case FormulaKind::kOr:
      for (const auto& c : f.children) {
        if (naive_sat(*c, tr, t)) return true;
      }
      return false;
    case FormulaKind::kImplies:
      return (-naive_rob(*f.children[0], tr, t) >= 0.0) ||
             naive_sat(*f.children[1], tr, t);
    case FormulaKind::kEventually:
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        if (naive_sat(*f.children[0], tr, u)) return true;
      }
      return false;
    case FormulaKind::kGlobally:
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        if (!naive_sat(*f.children[0], tr, u)) return false;
      }
      return true;
    case FormulaKind::kUntil:
      for (int u = t + f.lo; u <= t + f.hi; ++u) {
        bool prefix_ok = true;
        for (int w = t; w <= u; ++w) {
          prefix_ok = prefix_ok && naive_sat(*f.children[0], tr, w);
        }
        if (prefix_ok && naive_sat(*f.children[1], tr, u)) return true;
      }
      return false;
  }
  return false;
}

FormulaPtr random_pred(std::mt19937_64& rng, bool allow_counter) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> rad(0.3, 1.5);
  std::uniform_int_distribution<int> kind(0, allow_counter ? 2 : 1);
  switch (kind(rng)) {
    case 0:
      return stl::make_predicate(
          stl::RegionPredicate{{coord(rng), coord(rng)}, rad(rng), "r"});
    case 1: {
      Eigen::Vector2d n{coord(rng), coord(rng)};
      if (n.norm() < 1e-6) n = {1.0, 0.0};
      return stl::make_predicate(stl::HalfplanePredicate{n, coord(rng)});
    }
    default:
      return stl::make_predicate(stl::VisitCountPredicate{
          stl::RegionPredicate{{coord(rng), coord(rng)}, rad(rng), "r"}, 2});
  }
}

FormulaPtr random_formula(std::mt19937_64& rng, int depth, int max_window,
                          bool allow_counter) {
  std::uniform_int_distribution<int> pick(0, 6);
  std::uniform_int_distribution<int> lo_d(0, 2);
  std::uniform_int_distribution<int> len_d(0, max_window - 1);
  if (depth <= 0) return random_pred(rng, allow_counter);
  switch (pick(rng)) {
    case 0:
      return random_pred(rng, allow_counter);
    case 1:
      return stl::make_not(random_formula(rng, depth - 1, max_window, allow_counter));
    case 2:
      return stl::make_and({random_formula(rng, depth - 1, max_window, allow_counter),
                            random_formula(rng, depth - 1, max_window, allow_counter)});
    case 3:
      return stl::make_or({random_formula(rng, depth - 1, max_window, allow_counter),
                           random_formula(rng, depth - 1, max_window, allow_counter)});
    case 4: {
      const int lo = lo_d(rng);
      return stl::make_eventually(
          lo, lo + len_d(rng),
          random_formula(rng, depth - 1, max_window, allow_counter));
    }
    case 5: {
      const int lo = lo_d(rng);
      return stl::make_globally(
          lo, lo + len_d(rng),
          random_formula(rng, depth - 1, max_window, allow_counter));
    }
    default: {
      const int lo = lo_d(rng);
      return stl::make_until(
          lo, lo + len_d(rng),
          random_formula(rng, depth - 1, max_window, allow_counter),
          random_formula(rng, depth - 1, max_window, allow_counter));
    }
  }
}

Trace random_trace(std::mt19937_64& rng, int len) {
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  Trace tr;
  tr.reserve(len);
  for (int i = 0; i < len; ++i) tr.push_back({coord(rng), coord(rng)});
  return tr;
}

}  // namespace

TEST_CASE("region predicate robustness is radius minus L1 distance") {
  auto a = stl::make_predicate(stl::RegionPredicate{{0.0, 0.0}, 1.0, "A"});
  Trace tr{{0.5, 0.5}, {2.0, 0.0}, {0.0, 0.0}};
  CHECK(stl::robustness_exact(*a, tr, 0) == doctest::Approx(0.0));
  CHECK(stl::robustness_exact(*a, tr, 1) == doctest::Approx(-1.0));
  CHECK(stl::robustness_exact(*a, tr, 2) == doctest::Approx(1.0));
  CHECK(stl::boolean_sat(*a, tr, 0));  // tie at exactly 0 counts as satisfied
}

TEST_CASE("eventually picks the best sample in the window") {
  // x >= 0 as a halfplane over signal (-1, -1, 1).
  auto hp = stl::make_predicate(stl::HalfplanePredicate{{1.0, 0.0}, 0.0});
  auto f = stl::make_eventually(0, 2, hp);
  Trace tr{{-1.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}};
  CHECK(stl::robustness_exact(*f, tr, 0) == doctest::Approx(1.0));
  auto g = stl::make_globally(0, 2, hp);
  CHECK(stl::robustness_exact(*g, tr, 0) == doctest::Approx(-1.0));
}

TEST_CASE("until requires the hold to persist through the witness") {
  auto hold = stl::make_predicate(stl::HalfplanePredicate{{1.0, 0.0}, 0.0});
  auto target = stl::make_predicate(stl::HalfplanePredicate{{0.0, 1.0}, 0.0});
  auto u = stl::make_until(0, 2, hold, target);
  // Hold fails at index 1 before the target becomes positive at index 2.
  Trace broken{{1.0, -1.0}, {-2.0, -1.0}, {1.0, 3.0}};
  CHECK(stl::robustness_exact(*u, broken, 0) == doctest::Approx(-1.0));
  Trace fine{{1.0, -1.0}, {2.0, -1.0}, {1.0, 3.0}};
  CHECK(stl::robustness_exact(*u, fine, 0) == doctest::Approx(1.0));
}

TEST_CASE("implies is evaluated as its or-not lowering") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto f = random_formula(rng, 2, 3, true);
    auto g = random_formula(rng, 2, 3, true);
    auto imp = stl::make_implies(f, g);
    auto lowered = stl::make_or({stl::make_not(f), g});
    Trace tr = random_trace(rng, 16);
    CHECK(stl::robustness_exact(*imp, tr, 0) ==
          doctest::Approx(stl::robustness_exact(*lowered, tr, 0)).epsilon(1e-12));
  }
}

TEST_CASE("exact semantics agree with the naive reference") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 400; ++i) {
    auto f = random_formula(rng, 3, 4, true);
    Trace tr = random_trace(rng, stl::horizon(*f) + 4);
    const int t = static_cast<int>(rng() % 3);
    const double got = stl::robustness_exact(*f, tr, t);
    const double want = naive_rob(*f, tr, t);
    CHECK(std::abs(got - want) <= 1e-12);
    CHECK(stl::boolean_sat(*f, tr, t) == (want >= 0.0));
  }
}

TEST_CASE("sign of robustness matches the boolean reference") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    auto f = random_formula(rng, 3, 4, true);
    Trace tr = random_trace(rng, stl::horizon(*f) + 2);
    const double rho = stl::robustness_exact(*f, tr, 0);
    const bool sat = naive_sat(*f, tr, 0);
    if (rho > 0.0) CHECK(sat);
    if (rho < 0.0) CHECK(!sat);
    // Exact zeros count as satisfied.
    if (rho == 0.0) CHECK(sat);
  }
}

TEST_CASE("de morgan holds exactly") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto f = random_formula(rng, 2, 3, true);
    auto g = random_formula(rng, 2, 3, true);
    auto lhs = stl::make_not(stl::make_and({f, g}));
    auto rhs = stl::make_or({stl::make_not(f), stl::make_not(g)});
    Trace tr = random_trace(rng, std::max(stl::horizon(*lhs), stl::horizon(*rhs)) + 2);
    CHECK(stl::robustness_exact(*lhs, tr, 0) == stl::robustness_exact(*rhs, tr, 0));
  }
}

TEST_CASE("horizon accounting and errors") {
  auto a = stl::make_predicate(stl::RegionPredicate{{0, 0}, 1.0, "A"});
  auto f = stl::make_eventually(0, 5, stl::make_globally(1, 3, a));
  CHECK(stl::horizon(*f) == 8);
  std::mt19937_64 rng(3);
  Trace tr = random_trace(rng, 8);  // one short of the 9 samples needed
  CHECK_THROWS_AS(stl::robustness_exact(*f, tr, 0), stl::HorizonError);
  CHECK_THROWS_WITH_AS(stl::robustness_exact(*f, tr, 0),
                       doctest::Contains("horizon"), stl::HorizonError);
  Trace ok = random_trace(rng, 9);
  CHECK_NOTHROW(stl::robustness_exact(*f, ok, 0));
  CHECK_THROWS_AS(stl::robustness_exact(*f, ok, 1), stl::HorizonError);
}

TEST_CASE("visit counting over trace prefixes") {
  stl::RegionPredicate a{{0.0, 0.0}, 1.0, "A"};
  Trace tr{{0.0, 0.0}, {3.0, 0.0}, {0.5, 0.0}, {0.2, 0.0}, {3.0, 3.0}, {0.0, 0.1}};
  CHECK(stl::entries_up_to(tr, a, 0) == 1);  // starting inside counts
  CHECK(stl::entries_up_to(tr, a, 1) == 1);
  CHECK(stl::entries_up_to(tr, a, 2) == 2);
  CHECK(stl::entries_up_to(tr, a, 3) == 2);  // staying inside is one entry
  CHECK(stl::entries_up_to(tr, a, 5) == 3);
  auto twice = stl::make_predicate(stl::VisitCountPredicate{a, 2});
  CHECK(stl::robustness_exact(*twice, tr, 1) == -1.0);
  CHECK(stl::robustness_exact(*twice, tr, 2) == 1.0);
}

TEST_CASE("structural queries") {
  auto spec = stl::builtin_spec("seq");
  CHECK(stl::node_count(*spec.formula) == 7);
  CHECK(stl::depth(*spec.formula) == 3);
  CHECK(stl::horizon(*spec.formula) == 15);
  CHECK(stl::max_aggregation_width(*spec.formula) == 6);
}

TEST_CASE("constructor validation") {
  auto a = stl::make_predicate(stl::RegionPredicate{{0, 0}, 1.0, "A"});
  CHECK_THROWS_AS(stl::make_eventually(3, 1, a), std::invalid_argument);
  CHECK_THROWS_AS(stl::make_and({a}), std::invalid_argument);
  CHECK_THROWS_AS(
      stl::make_predicate(stl::RegionPredicate{{0, 0}, -1.0, "A"}),
      std::invalid_argument);
}

TEST_CASE("parser round trips and precedence") {
  const auto regions = stl::builtin_regions();
  auto f = stl::parse_spec("F[0,5](A) & F[5,10](B) & F[10,15](C)", regions);
  CHECK(*f == *stl::builtin_spec("seq").formula);

  // Reparsing the printed form reproduces the tree.
  for (const char* text :
       {"A & B | C", "A -> B -> C", "!A U[0,2] (B | !C)", "G[1,4](A -> F[0,2](B))",
        "  A\n & (B | D) "}) {
    auto g = stl::parse_spec(text, regions);
    auto h = stl::parse_spec(stl::to_string(*g), regions);
    CHECK(*g == *h);
  }

  // '&' binds tighter than '|', '->' is lowest and right-associative.
  auto mixed = stl::parse_spec("A & B | C", regions);
  CHECK(mixed->kind == FormulaKind::kOr);
  CHECK(mixed->children[0]->kind == FormulaKind::kAnd);
  auto arrows = stl::parse_spec("A -> B -> C", regions);
  CHECK(arrows->kind == FormulaKind::kImplies);
  CHECK(arrows->children[1]->kind == FormulaKind::kImplies);
}

TEST_CASE("parser reports positions and bad input") {
  const auto regions = stl::builtin_regions();
  CHECK_THROWS_WITH_AS(stl::parse_spec("F[3,1](A)", regions),
                       doctest::Contains("temporal bound a>b"), stl::ParseError);
  CHECK_THROWS_WITH_AS(stl::parse_spec("A & Q", regions),
                       doctest::Contains("unknown region 'Q'"), stl::ParseError);
  try {
    stl::parse_spec("A &\n  & B", regions);
    CHECK(false);
  } catch (const stl::ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() >= 3);
  }
  CHECK_THROWS_AS(stl::parse_spec("", regions), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("A B", regions), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("F[0,2] A", regions), stl::ParseError);
}

TEST_CASE("builtin specs carry the published timing parameters") {
  struct Row {
    const char* name;
    int T, k, Th;
  };
  for (const Row& row : std::initializer_list<Row>{{"seq", 15, 20, 1500},
                                                   {"cover", 15, 20, 1500},
                                                   {"loop", 30, 20, 3000},
                                                   {"signal", 30, 20, 3000},
                                                   {"branch", 20, 10, 1000}}) {
    auto spec = stl::builtin_spec(row.name);
    CHECK(spec.plan_steps == row.T);
    CHECK(spec.goal_interval == row.k);
    CHECK(spec.eval_horizon() == row.Th);
    CHECK(spec.formula != nullptr);
  }
  CHECK_THROWS_AS(stl::builtin_spec("nope"), std::invalid_argument);

  // Region table shared across builtins.
  auto regions = stl::builtin_regions();
  CHECK(regions.at("A").center == Eigen::Vector2d(0, 0));
  CHECK(regions.at("B").center == Eigen::Vector2d(2, 2));
  CHECK(regions.at("C").center == Eigen::Vector2d(2, 0));
  CHECK(regions.at("D").center == Eigen::Vector2d(0, 2));
  for (auto& [_, r] : regions) CHECK(r.radius == 1.0);

  // branch is a disjunction of two conjunctions; loop nests F inside G.
  auto branch = stl::builtin_spec("branch");
  CHECK(branch.formula->kind == FormulaKind::kOr);
  auto loop = stl::builtin_spec("loop");
  CHECK(loop.formula->kind == FormulaKind::kGlobally);
  CHECK(loop.formula->children[0]->kind == FormulaKind::kAnd);

  // signal pairs the loop mission with the visit-twice counter through until.
  auto signal = stl::builtin_spec("signal");
  CHECK(signal.formula->kind == FormulaKind::kAnd);
  CHECK(signal.formula->children[0]->kind == FormulaKind::kUntil);
  CHECK(std::holds_alternative<stl::VisitCountPredicate>(
      signal.formula->children[0]->children[1]->pred));
}

namespace {

double smooth_value(const Formula& f, const Trace& tr, int t, double temp) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  vars.reserve(tr.size());
  for (const auto& p : tr) vars.push_back(tape.leaf(Eigen::MatrixXd(p)));
  return stl::robustness_smooth(tape, f, vars, t, temp).value()(0, 0);
}

}  // namespace

TEST_CASE("smooth robustness respects the logsumexp bound and tightens") {
  std::mt19937_64 rng(23);
  const double temps[] = {1.0, 10.0, 100.0, 1000.0};
  // Opposing soft-min/soft-max errors can cancel for a single formula, so the
  // per-case gap need not shrink with temp; the worst case over a suite does.
  std::vector<double> max_gap(4, 0.0);
  for (int i = 0; i < 60; ++i) {
    auto f = random_formula(rng, 3, 4, true);
    Trace tr = random_trace(rng, stl::horizon(*f) + 2);
    const double exact = stl::robustness_exact(*f, tr, 0);
    for (int ti = 0; ti < 4; ++ti) {
      const double sm = smooth_value(*f, tr, 0, temps[ti]);
      const double bound =
          stl::depth(*f) *
              std::log(static_cast<double>(stl::max_aggregation_width(*f))) /
              temps[ti] +
          2.0 * std::sqrt(stl::kSmoothL1Eps);
      CHECK(std::abs(sm - exact) <= bound + 1e-12);
      max_gap[ti] = std::max(max_gap[ti], std::abs(sm - exact));
    }
  }
  for (int ti = 1; ti < 4; ++ti) CHECK(max_gap[ti] <= max_gap[ti - 1] + 1e-12);
}

TEST_CASE("single-element windows are exact under smoothing") {
  auto a = stl::make_predicate(stl::HalfplanePredicate{{1.0, 0.0}, 0.25});
  auto f = stl::make_eventually(2, 2, a);
  Trace tr{{0.1, 0}, {0.2, 0}, {0.7, 0}, {0.4, 0}};
  const double sm = smooth_value(*f, tr, 0, 10.0);
  CHECK(sm == doctest::Approx(stl::robustness_exact(*f, tr, 0)).epsilon(1e-12));
}

TEST_CASE("smooth gradients match central differences") {
  std::mt19937_64 rng(29);
  auto spec = stl::builtin_spec("seq");
  for (int rep = 0; rep < 5; ++rep) {
    Trace tr = random_trace(rng, 16);
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& p : tr) vars.push_back(tape.leaf(Eigen::MatrixXd(p)));
    auto rho = stl::robustness_smooth(tape, *spec.formula, vars, 0, 10.0);
    tape.backward(rho);
    const double h = 1e-6;
    for (int t = 0; t < 16; t += 5) {
      for (int c = 0; c < 2; ++c) {
        Trace hi = tr, lo = tr;
        hi[t][c] += h;
        lo[t][c] -= h;
        const double fd = (smooth_value(*spec.formula, hi, 0, 10.0) -
                           smooth_value(*spec.formula, lo, 0, 10.0)) /
                          (2 * h);
        const double an = vars[t].grad()(c, 0);
        CHECK(an == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("visit-count predicates contribute no gradient") {
  stl::RegionPredicate a{{0.0, 0.0}, 1.0, "A"};
  auto f = stl::make_predicate(stl::VisitCountPredicate{a, 2});
  ad::Tape tape;
  Trace tr{{0.0, 0.0}, {3.0, 0.0}, {0.5, 0.0}};
  std::vector<ad::Var> vars;
  for (const auto& p : tr) vars.push_back(tape.leaf(Eigen::MatrixXd(p)));
  auto rho = stl::robustness_smooth(tape, *f, vars, 2, 10.0);
  CHECK(rho.value()(0, 0) == 1.0);
  tape.backward(rho);
  for (const auto& v : vars) CHECK(v.grad().norm() == 0.0);
}

TEST_CASE("smooth and exact stay within bound on builtin missions") {
  std::mt19937_64 rng(31);
  for (const char* name : {"seq", "cover", "branch"}) {
    auto spec = stl::builtin_spec(name);
    for (int rep = 0; rep < 3; ++rep) {
      Trace tr = random_trace(rng, spec.plan_steps + 1);
      const double exact = stl::robustness_exact(*spec.formula, tr, 0);
      const double sm = smooth_value(*spec.formula, tr, 0, 10.0);
      const double bound =
          stl::depth(*spec.formula) *
              std::log(static_cast<double>(stl::max_aggregation_width(*spec.formula))) /
              10.0 +
          2.0 * std::sqrt(stl::kSmoothL1Eps);
      CHECK(std::abs(sm - exact) <= bound + 1e-12);
    }
  }
}
