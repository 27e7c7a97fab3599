#include "stlswarm/graph/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace stlswarm::graph {

namespace {

// Coordinates the relative edge features are taken in: raw state for the
// integrators, [px, py, v cos theta, v sin theta] for dubins.
Eigen::VectorXd embed_state(const env::State& x, const env::EnvConfig& cfg) {
  if (cfg.kind != env::EnvKind::kDubins) return x;
  Eigen::VectorXd e(4);
  e << x(0), x(1), x(3) * std::cos(x(2)), x(3) * std::sin(x(2));
  return e;
}

Eigen::VectorXd embed_point(const Eigen::Vector2d& p, const env::EnvConfig& cfg) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(edge_feature_dim(cfg));
  e.head<2>() = p;
  return e;
}

Eigen::RowVector3d one_hot(NodeKind k) {
  switch (k) {
    case NodeKind::kAgent: return {1.0, 0.0, 0.0};
    case NodeKind::kGoal: return {0.0, 1.0, 0.0};
    case NodeKind::kLidarHit: return {0.0, 0.0, 1.0};
  }
  throw std::logic_error("unreachable");
}

}  // namespace

int edge_feature_dim(const env::EnvConfig& cfg) {
  return cfg.kind == env::EnvKind::kDubins ? 4 : cfg.state_dim();
}

GraphObs build_graph(const std::vector<env::State>& states,
                     const env::EnvConfig& cfg, bool include_lidar) {
  if (states.empty()) throw std::invalid_argument("build_graph: no agents");
  for (const auto& s : states) {
    if (s.size() != cfg.state_dim()) {
      throw std::invalid_argument("build_graph: state dimension mismatch");
    }
    if (!s.allFinite()) throw std::invalid_argument("build_graph: non-finite state");
  }

  const int n = static_cast<int>(states.size());
  const int fdim = edge_feature_dim(cfg);
  GraphObs g;

  std::vector<Eigen::VectorXd> embedded;
  embedded.reserve(n);
  for (const auto& s : states) embedded.push_back(embed_state(s, cfg));

  for (int i = 0; i < n; ++i) {
    g.node_kinds.push_back(NodeKind::kAgent);
    g.positions.push_back(env::position_of(states[i]));
  }

  std::vector<Eigen::VectorXd> features;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dist = (g.positions[i] - g.positions[j]).norm();
      if (dist <= cfg.sensing_radius) {
        g.edges.emplace_back(j, i);  // message from j into i
        features.push_back(embedded[j] - embedded[i]);
      }
    }
  }

  if (include_lidar) {
    for (int i = 0; i < n; ++i) {
      const auto hits =
          env::lidar_hits(g.positions[i], env::heading_of(states[i], cfg), cfg);
      for (const auto& [ray, point] : hits) {
        const int node = g.num_nodes();
        g.node_kinds.push_back(NodeKind::kLidarHit);
        g.positions.push_back(point);
        g.edges.emplace_back(node, i);
        features.push_back(embed_point(point, cfg) - embedded[i]);
      }
    }
  }

  g.node_features.resize(g.num_nodes(), 3);
  for (int i = 0; i < g.num_nodes(); ++i) {
    g.node_features.row(i) = one_hot(g.node_kinds[i]);
  }
  g.edge_features.resize(static_cast<int>(features.size()), fdim);
  for (std::size_t e = 0; e < features.size(); ++e) {
    g.edge_features.row(static_cast<int>(e)) = features[e];
  }
  return g;
}

}  // namespace stlswarm::graph
