#include <json.hpp>

#include <stdexcept>

#include "stlswarm/common/io.hpp"
#include "stlswarm/planner/planner.hpp"

namespace stlswarm::planner {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw std::runtime_error("checkpoint array '" + name + "' is malformed");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto& data = j.at("data");
  if (rows < 1 || cols < 1 ||
      data.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::runtime_error("checkpoint array '" + name +
                             "' has inconsistent dimensions");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
  }
  return m;
}

void check_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                 const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::runtime_error("checkpoint array '" + name + "' has shape " +
                             std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_mlp_shape(const Mlp& m, Eigen::Index in, Eigen::Index hidden,
                     Eigen::Index out, const std::string& name) {
  check_shape(m.w1, hidden, in, name + ".w1");
  check_shape(m.b1, hidden, 1, name + ".b1");
  check_shape(m.w2, out, hidden, name + ".w2");
  check_shape(m.b2, out, 1, name + ".b2");
}

// Distinct region predicates in depth-first order of first appearance.
void collect_regions(const stl::Formula& f, std::vector<std::string>& names,
                     std::vector<Eigen::Vector2d>& centers) {
  auto add = [&](const stl::RegionPredicate& r) {
    for (const std::string& n : names) {
      if (n == r.name) return;
    }
    names.push_back(r.name);
    centers.push_back(r.center);
  };
  if (f.kind == stl::FormulaKind::kPredicate) {
    if (const auto* r = std::get_if<stl::RegionPredicate>(&f.pred)) {
      add(*r);
    } else if (const auto* v = std::get_if<stl::VisitCountPredicate>(&f.pred)) {
      add(v->region);
    }
    return;
  }
  for (const auto& c : f.children) collect_regions(*c, names, centers);
}

}  // namespace

void save_checkpoint(const std::string& path, const PlannerParams& params,
                     const std::string& config_hash) {
  json arrays = json::object();
  for (const auto& [name, m] : params.named()) arrays[name] = matrix_to_json(*m);
  const json doc{{"format", "stlswarm-checkpoint"},
                 {"version", 1},
                 {"mode", to_string(params.mode)},
                 {"hidden", params.hidden},
                 {"layers", params.layers.size()},
                 {"config_hash", config_hash},
                 {"arrays", std::move(arrays)}};
  common::atomic_write_text(path, doc.dump(2) + "\n");
}

PlannerParams load_checkpoint(const std::string& path,
                              std::string* config_hash) {
  json doc;
  try {
    doc = json::parse(common::read_text(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint '" + path + "' is not valid JSON: " +
                             e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "stlswarm-checkpoint") {
    throw std::runtime_error("checkpoint '" + path +
                             "' missing stlswarm-checkpoint format tag");
  }

  PlannerParams p;
  p.mode = planner_mode_from_string(doc.at("mode").get<std::string>());
  p.hidden = doc.at("hidden").get<int>();
  const int n_layers = doc.at("layers").get<int>();
  if (p.hidden < 1 || n_layers < 0) {
    throw std::runtime_error("checkpoint '" + path + "' has invalid dimensions");
  }
  if (p.mode == PlannerMode::kGnnOde && n_layers < 1) {
    throw std::runtime_error("checkpoint '" + path +
                             "' needs at least one message-passing layer");
  }
  p.layers.resize(p.mode == PlannerMode::kGnnOde ? n_layers : 0);

  const json& arrays = doc.at("arrays");
  auto slots = p.named_mutable();
  if (arrays.size() != slots.size()) {
    throw std::runtime_error("checkpoint '" + path + "' carries " +
                             std::to_string(arrays.size()) + " arrays, expected " +
                             std::to_string(slots.size()));
  }
  for (auto& [name, m] : slots) {
    if (!arrays.contains(name)) {
      throw std::runtime_error("checkpoint '" + path + "' missing array '" +
                               name + "'");
    }
    *m = matrix_from_json(arrays.at(name), name);
  }

  const Eigen::Index h = p.hidden;
  if (p.mode == PlannerMode::kGnnOde) {
    check_shape(p.embed_w, h, 3, "embed.w");
    check_shape(p.embed_b, h, 1, "embed.b");
    // Edge feature width is recovered from the stored edge input layer; it
    // must be consistent across layers and is re-checked against the
    // environment when planning.
    const Eigen::Index fdim = p.layers[0].edge.w1.cols() - 2 * h;
    if (fdim < 1) {
      throw std::runtime_error("checkpoint '" + path +
                               "' edge layer narrower than two embeddings");
    }
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const std::string base = "layer" + std::to_string(l);
      check_mlp_shape(p.layers[l].edge, 2 * h + fdim, h, h, base + ".edge");
      check_mlp_shape(p.layers[l].node, 2 * h, h, h, base + ".node");
    }
    check_mlp_shape(p.readout, h + 2, h, 2, "readout");
  } else {
    check_mlp_shape(p.readout, 2, h, 2, "readout");
  }
  check_mlp_shape(p.ode, 2, h, 2, "ode");

  if (config_hash != nullptr) *config_hash = doc.value("config_hash", "");
  return p;
}

GoalPlan reference_plan(const stl::SpecConfig& spec, int n_agents) {
  if (n_agents < 1) throw std::invalid_argument("need at least one agent");
  const int T = spec.plan_steps;
  std::vector<std::string> names;
  std::vector<Eigen::Vector2d> centers;
  collect_regions(*spec.formula, names, centers);
  if (centers.empty()) {
    throw std::invalid_argument("mission '" + spec.name +
                                "' names no regions to schedule");
  }

  std::vector<Eigen::Vector2d> schedule(static_cast<std::size_t>(T) + 1);
  const int m = static_cast<int>(centers.size());
  if (spec.name == "loop") {
    // Cycle the regions so every T/2-wide window sees all of them.
    const int phase = std::max(1, T / (2 * m));
    for (int t = 0; t <= T; ++t) schedule[t] = centers[(t / phase) % m];
  } else {
    // Consecutive equal spans, one per region in order of appearance. The
    // recurring mission visits its first region twice before heading to the
    // final one.
    std::vector<Eigen::Vector2d> order = centers;
    if (spec.name == "signal" && m == 4) {
      order = {centers[0], centers[1], centers[2], centers[0], centers[3]};
    }
    const int spans = static_cast<int>(order.size());
    for (int t = 0; t <= T; ++t) {
      int i = 0;
      while (i + 1 < spans && t > ((i + 1) * T) / spans) ++i;
      schedule[t] = order[i];
    }
  }
  return GoalPlan(static_cast<std::size_t>(n_agents), schedule);
}

}  // namespace stlswarm::planner
