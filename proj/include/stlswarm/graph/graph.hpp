#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stlswarm/env/env.hpp"

namespace stlswarm::graph {

enum class NodeKind { kAgent, kGoal, kLidarHit };

// Node features are the one-hot {agent, goal, lidar-hit}; edge features are
// relative coordinates, so the graph is translation invariant.
struct GraphObs {
  Eigen::MatrixXd node_features;            // num_nodes x 3
  std::vector<NodeKind> node_kinds;
  std::vector<std::pair<int, int>> edges;   // (src, dst), messages flow src->dst
  Eigen::MatrixXd edge_features;            // num_edges x edge_dim
  std::vector<Eigen::Vector2d> positions;   // workspace position per node

  int num_nodes() const { return static_cast<int>(node_kinds.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

// Relative feature dimension: state_dim for integrators, 4 for dubins (which
// maps [px, py, theta, v] to [px, py, v cos theta, v sin theta] first).
int edge_feature_dim(const env::EnvConfig& cfg);

// Agents become the first n nodes in input order. Agent pairs within the
// sensing radius are connected in both directions; each lidar hit becomes a
// node with an edge into its observing agent. Goal nodes never appear here.
GraphObs build_graph(const std::vector<env::State>& states,
                     const env::EnvConfig& cfg, bool include_lidar);

}  // namespace stlswarm::graph
