#include "stlswarm/stl/formula.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace stlswarm::stl {

namespace {

void check_bounds(int lo, int hi) {
  if (lo < 0) throw std::invalid_argument("temporal bound a must be >= 0");
  if (lo > hi) throw std::invalid_argument("temporal bound a>b");
}

void check_operand(const FormulaPtr& f, const char* who) {
  if (!f) throw std::invalid_argument(std::string(who) + ": null operand");
}

}  // namespace

bool Formula::operator==(const Formula& o) const {
  if (kind != o.kind || lo != o.lo || hi != o.hi) return false;
  if (kind == FormulaKind::kPredicate && !(pred == o.pred)) return false;
  if (children.size() != o.children.size()) return false;
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (!(*children[i] == *o.children[i])) return false;
  }
  return true;
}

FormulaPtr make_predicate(Predicate p) {
  if (const auto* r = std::get_if<RegionPredicate>(&p)) {
    if (r->radius <= 0.0) throw std::invalid_argument("region radius must be positive");
  }
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::kPredicate;
  f->pred = std::move(p);
  return f;
}

FormulaPtr make_not(FormulaPtr f) {
  check_operand(f, "not");
  auto n = std::make_shared<Formula>();
  n->kind = FormulaKind::kNot;
  n->children = {std::move(f)};
  return n;
}

static FormulaPtr make_nary(FormulaKind kind, std::vector<FormulaPtr> fs,
                            const char* who) {
  if (fs.size() < 2) {
    throw std::invalid_argument(std::string(who) + " needs at least 2 operands");
  }
  for (const auto& f : fs) check_operand(f, who);
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->children = std::move(fs);
  return n;
}

FormulaPtr make_and(std::vector<FormulaPtr> fs) {
  return make_nary(FormulaKind::kAnd, std::move(fs), "and");
}

FormulaPtr make_or(std::vector<FormulaPtr> fs) {
  return make_nary(FormulaKind::kOr, std::move(fs), "or");
}

FormulaPtr make_implies(FormulaPtr f, FormulaPtr g) {
  check_operand(f, "implies");
  check_operand(g, "implies");
  auto n = std::make_shared<Formula>();
  n->kind = FormulaKind::kImplies;
  n->children = {std::move(f), std::move(g)};
  return n;
}

static FormulaPtr make_window(FormulaKind kind, int lo, int hi, FormulaPtr f) {
  check_bounds(lo, hi);
  check_operand(f, "temporal operator");
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->lo = lo;
  n->hi = hi;
  n->children = {std::move(f)};
  return n;
}

FormulaPtr make_eventually(int lo, int hi, FormulaPtr f) {
  return make_window(FormulaKind::kEventually, lo, hi, std::move(f));
}

FormulaPtr make_globally(int lo, int hi, FormulaPtr f) {
  return make_window(FormulaKind::kGlobally, lo, hi, std::move(f));
}

FormulaPtr make_until(int lo, int hi, FormulaPtr f, FormulaPtr g) {
  check_bounds(lo, hi);
  check_operand(f, "until");
  check_operand(g, "until");
  auto n = std::make_shared<Formula>();
  n->kind = FormulaKind::kUntil;
  n->lo = lo;
  n->hi = hi;
  n->children = {std::move(f), std::move(g)};
  return n;
}

int depth(const Formula& f) {
  int d = 0;
  for (const auto& c : f.children) d = std::max(d, depth(*c));
  return d + 1;
}

int node_count(const Formula& f) {
  int n = 1;
  for (const auto& c : f.children) n += node_count(*c);
  return n;
}

int horizon(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::kPredicate:
      return 0;
    case FormulaKind::kNot:
      return horizon(*f.children[0]);
    case FormulaKind::kAnd:
    case FormulaKind::kOr:
    case FormulaKind::kImplies: {
      int h = 0;
      for (const auto& c : f.children) h = std::max(h, horizon(*c));
      return h;
    }
    case FormulaKind::kEventually:
    case FormulaKind::kGlobally:
      return f.hi + horizon(*f.children[0]);
    case FormulaKind::kUntil:
      return f.hi + std::max(horizon(*f.children[0]), horizon(*f.children[1]));
  }
  throw std::logic_error("unreachable");
}

int max_aggregation_width(const Formula& f) {
  int w = 1;
  switch (f.kind) {
    case FormulaKind::kAnd:
    case FormulaKind::kOr:
      w = static_cast<int>(f.children.size());
      break;
    case FormulaKind::kImplies:
      w = 2;
      break;
    case FormulaKind::kEventually:
    case FormulaKind::kGlobally:
      w = f.hi - f.lo + 1;
      break;
    case FormulaKind::kUntil:
      // The outer max spans the window; the inner min at t' = t + hi spans
      // one g sample plus hi + 1 f samples.
      w = std::max(f.hi - f.lo + 1, f.hi + 2);
      break;
    default:
      break;
  }
  for (const auto& c : f.children) w = std::max(w, max_aggregation_width(*c));
  return w;
}

namespace {

std::string pred_to_string(const Predicate& p) {
  if (const auto* r = std::get_if<RegionPredicate>(&p)) return r->name;
  if (const auto* h = std::get_if<HalfplanePredicate>(&p)) {
    std::ostringstream os;
    os << "halfplane(" << h->normal.x() << "," << h->normal.y() << ","
       << h->offset << ")";
    return os.str();
  }
  const auto& v = std::get<VisitCountPredicate>(p);
  std::ostringstream os;
  os << "visits(" << v.region.name << "," << v.required << ")";
  return os.str();
}

void print(const Formula& f, std::ostream& os) {
  switch (f.kind) {
    case FormulaKind::kPredicate:
      os << pred_to_string(f.pred);
      break;
    case FormulaKind::kNot:
      os << "!";
      print(*f.children[0], os);
      break;
    case FormulaKind::kAnd:
    case FormulaKind::kOr:
    case FormulaKind::kImplies: {
      const char* sep = f.kind == FormulaKind::kAnd   ? " & "
                        : f.kind == FormulaKind::kOr ? " | "
                                                     : " -> ";
      os << "(";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) os << sep;
        print(*f.children[i], os);
      }
      os << ")";
      break;
    }
    case FormulaKind::kEventually:
    case FormulaKind::kGlobally:
      os << (f.kind == FormulaKind::kEventually ? "F" : "G") << "[" << f.lo
         << "," << f.hi << "](";
      print(*f.children[0], os);
      os << ")";
      break;
    case FormulaKind::kUntil:
      os << "(";
      print(*f.children[0], os);
      os << " U[" << f.lo << "," << f.hi << "] ";
      print(*f.children[1], os);
      os << ")";
      break;
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print(f, os);
  return os.str();
}

}  // namespace stlswarm::stl
