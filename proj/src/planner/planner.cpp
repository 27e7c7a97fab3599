#include "stlswarm/planner/planner.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

namespace stlswarm::planner {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_mlp(const Mlp& m, int in, int hidden, int out, const std::string& who) {
  require(m.w1.rows() == hidden && m.w1.cols() == in, who + ".w1 shape mismatch");
  require(m.b1.rows() == hidden && m.b1.cols() == 1, who + ".b1 shape mismatch");
  require(m.w2.rows() == out && m.w2.cols() == hidden, who + ".w2 shape mismatch");
  require(m.b2.rows() == out && m.b2.cols() == 1, who + ".b2 shape mismatch");
}

Eigen::MatrixXd uniform_init(std::mt19937_64& rng, int rows, int cols, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> d(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  }
  return m;
}

Mlp init_mlp(std::mt19937_64& rng, int in, int hidden, int out) {
  Mlp m;
  m.w1 = uniform_init(rng, hidden, in, in);
  m.b1 = uniform_init(rng, hidden, 1, in);
  m.w2 = uniform_init(rng, out, hidden, hidden);
  m.b2 = uniform_init(rng, out, 1, hidden);
  return m;
}

// Tape-side mirror of the parameter structs.
struct MlpVars {
  ad::Var w1, b1, w2, b2;
};

struct ParamVars {
  ad::Var embed_w, embed_b;
  std::vector<std::array<MlpVars, 2>> layers;  // [edge, node]
  MlpVars readout, ode;
};

MlpVars lift_mlp(ad::Tape& tape, const Mlp& m, const std::string& name,
                 std::vector<std::pair<std::string, ad::Var>>& named) {
  MlpVars v{tape.leaf(m.w1), tape.leaf(m.b1), tape.leaf(m.w2), tape.leaf(m.b2)};
  named.emplace_back(name + ".w1", v.w1);
  named.emplace_back(name + ".b1", v.b1);
  named.emplace_back(name + ".w2", v.w2);
  named.emplace_back(name + ".b2", v.b2);
  return v;
}

ad::Var apply_mlp(ad::Tape& tape, const MlpVars& m, ad::Var x, bool tanh_hidden) {
  ad::Var h = tape.add(tape.matmul(m.w1, x), m.b1);
  h = tanh_hidden ? tape.tanh(h) : tape.relu(h);
  return tape.add(tape.matmul(m.w2, h), m.b2);
}

// Shared residual unroll g_t = g_{t-1} + f(g_{t-1}).
void unroll(ad::Tape& tape, const MlpVars& ode,
            const std::vector<ad::Var>& initial, int plan_steps, PlanVars& out) {
  out.goals.resize(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i) {
    out.goals[i].clear();
    out.goals[i].reserve(static_cast<std::size_t>(plan_steps) + 1);
    ad::Var g = initial[i];
    out.goals[i].push_back(g);
    for (int t = 1; t <= plan_steps; ++t) {
      g = tape.add(g, apply_mlp(tape, ode, g, true));
      out.goals[i].push_back(g);
    }
  }
}

}  // namespace

std::string to_string(PlannerMode m) {
  return m == PlannerMode::kGnnOde ? "gnn_ode" : "ode_only";
}

PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "gnn_ode") return PlannerMode::kGnnOde;
  if (s == "ode_only") return PlannerMode::kOdeOnly;
  throw std::invalid_argument("unknown planner mode '" + s + "'");
}

void PlannerParams::validate(const env::EnvConfig& cfg) const {
  const int h = hidden;
  require(h >= 1, "hidden width must be positive");
  if (mode == PlannerMode::kGnnOde) {
    const int fdim = graph::edge_feature_dim(cfg);
    require(embed_w.rows() == h && embed_w.cols() == 3, "embed.w shape mismatch");
    require(embed_b.rows() == h && embed_b.cols() == 1, "embed.b shape mismatch");
    require(!layers.empty(), "gnn_ode needs at least one message-passing layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      check_mlp(layers[l].edge, 2 * h + fdim, h, h, "layer" + std::to_string(l) + ".edge");
      check_mlp(layers[l].node, 2 * h, h, h, "layer" + std::to_string(l) + ".node");
    }
    check_mlp(readout, h + 2, h, 2, "readout");
  } else {
    check_mlp(readout, 2, h, 2, "readout");
  }
  check_mlp(ode, 2, h, 2, "ode");
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> PlannerParams::named()
    const {
  auto self = const_cast<PlannerParams*>(this);
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  for (auto& [name, m] : self->named_mutable()) out.emplace_back(name, m);
  return out;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> PlannerParams::named_mutable() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  auto add_mlp = [&out](const std::string& name, Mlp& m) {
    out.emplace_back(name + ".w1", &m.w1);
    out.emplace_back(name + ".b1", &m.b1);
    out.emplace_back(name + ".w2", &m.w2);
    out.emplace_back(name + ".b2", &m.b2);
  };
  if (mode == PlannerMode::kGnnOde) {
    out.emplace_back("embed.w", &embed_w);
    out.emplace_back("embed.b", &embed_b);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      add_mlp("layer" + std::to_string(l) + ".edge", layers[l].edge);
      add_mlp("layer" + std::to_string(l) + ".node", layers[l].node);
    }
  }
  add_mlp("readout", readout);
  add_mlp("ode", ode);
  return out;
}

PlannerParams init_params(PlannerMode mode, const env::EnvConfig& cfg,
                          std::uint64_t seed, int hidden, int layers) {
  require(hidden >= 1 && layers >= 1, "hidden and layers must be positive");
  std::mt19937_64 rng(seed);
  PlannerParams p;
  p.mode = mode;
  p.hidden = hidden;
  if (mode == PlannerMode::kGnnOde) {
    const int fdim = graph::edge_feature_dim(cfg);
    p.embed_w = uniform_init(rng, hidden, 3, 3);
    p.embed_b = uniform_init(rng, hidden, 1, 3);
    for (int l = 0; l < layers; ++l) {
      GnnLayer layer;
      layer.edge = init_mlp(rng, 2 * hidden + fdim, hidden, hidden);
      layer.node = init_mlp(rng, 2 * hidden, hidden, hidden);
      p.layers.push_back(std::move(layer));
    }
    p.readout = init_mlp(rng, hidden + 2, hidden, 2);
  } else {
    p.readout = init_mlp(rng, 2, hidden, 2);
  }
  p.ode = init_mlp(rng, 2, hidden, 2);
  p.validate(cfg);
  return p;
}

PlanVars plan_on_tape(ad::Tape& tape, const PlannerParams& params,
                      const std::vector<env::State>& states,
                      const env::EnvConfig& cfg, int plan_steps) {
  params.validate(cfg);
  require(plan_steps >= 1, "plan_steps must be positive");
  require(!states.empty(), "plan needs at least one agent");
  const int n = static_cast<int>(states.size());

  PlanVars out;
  std::vector<ad::Var> initial_goals;
  initial_goals.reserve(n);

  if (params.mode == PlannerMode::kGnnOde) {
    const graph::GraphObs obs = graph::build_graph(states, cfg, true);
    ad::Var embed_w = tape.leaf(params.embed_w);
    ad::Var embed_b = tape.leaf(params.embed_b);
    out.param_vars.emplace_back("embed.w", embed_w);
    out.param_vars.emplace_back("embed.b", embed_b);
    std::vector<std::array<MlpVars, 2>> layer_vars;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const std::string base = "layer" + std::to_string(l);
      layer_vars.push_back({lift_mlp(tape, params.layers[l].edge, base + ".edge",
                                     out.param_vars),
                            lift_mlp(tape, params.layers[l].node, base + ".node",
                                     out.param_vars)});
    }
    MlpVars readout = lift_mlp(tape, params.readout, "readout", out.param_vars);
    MlpVars ode = lift_mlp(tape, params.ode, "ode", out.param_vars);

    // Node embeddings from the one-hot features.
    std::vector<ad::Var> h;
    h.reserve(obs.num_nodes());
    for (int i = 0; i < obs.num_nodes(); ++i) {
      ad::Var feat = tape.leaf(Eigen::MatrixXd(obs.node_features.row(i).transpose()));
      h.push_back(tape.add(tape.matmul(embed_w, feat), embed_b));
    }

    std::vector<ad::Var> edge_feats;
    edge_feats.reserve(obs.num_edges());
    for (int e = 0; e < obs.num_edges(); ++e) {
      edge_feats.push_back(
          tape.leaf(Eigen::MatrixXd(obs.edge_features.row(e).transpose())));
    }

    std::vector<std::vector<int>> incoming(obs.num_nodes());
    for (int e = 0; e < obs.num_edges(); ++e) {
      incoming[obs.edges[e].second].push_back(e);
    }

    const ad::Var zero_msg =
        tape.leaf(Eigen::MatrixXd::Zero(params.hidden, 1));
    for (const auto& layer : layer_vars) {
      std::vector<ad::Var> messages;
      messages.reserve(obs.num_edges());
      for (int e = 0; e < obs.num_edges(); ++e) {
        std::vector<ad::Var> parts{h[obs.edges[e].first], h[obs.edges[e].second],
                                   edge_feats[e]};
        messages.push_back(
            apply_mlp(tape, layer[0], tape.concat(parts, 0), false));
      }
      std::vector<ad::Var> next;
      next.reserve(obs.num_nodes());
      for (int i = 0; i < obs.num_nodes(); ++i) {
        ad::Var agg = zero_msg;
        if (!incoming[i].empty()) {
          std::vector<ad::Var> in;
          in.reserve(incoming[i].size());
          for (int e : incoming[i]) in.push_back(messages[e]);
          const double inv = 1.0 / static_cast<double>(in.size());
          agg = tape.scale(
              tape.matmul(tape.concat(in, 1),
                          tape.leaf(Eigen::MatrixXd::Ones(
                              static_cast<int>(in.size()), 1))),
              inv);
        }
        std::vector<ad::Var> parts{h[i], agg};
        next.push_back(apply_mlp(tape, layer[1], tape.concat(parts, 0), false));
      }
      h = std::move(next);
    }

    for (int i = 0; i < n; ++i) {
      ad::Var pos = tape.leaf(Eigen::MatrixXd(obs.positions[i]));
      std::vector<ad::Var> parts{h[i], pos};
      initial_goals.push_back(
          tape.add(pos, apply_mlp(tape, readout, tape.concat(parts, 0), false)));
    }
    unroll(tape, ode, initial_goals, plan_steps, out);
  } else {
    MlpVars readout = lift_mlp(tape, params.readout, "readout", out.param_vars);
    MlpVars ode = lift_mlp(tape, params.ode, "ode", out.param_vars);
    for (int i = 0; i < n; ++i) {
      ad::Var pos = tape.leaf(Eigen::MatrixXd(env::position_of(states[i])));
      initial_goals.push_back(
          tape.add(pos, apply_mlp(tape, readout, pos, false)));
    }
    unroll(tape, ode, initial_goals, plan_steps, out);
  }
  return out;
}

GoalPlan plan(const PlannerParams& params, const std::vector<env::State>& states,
              const env::EnvConfig& cfg, int plan_steps) {
  ad::Tape tape;
  const PlanVars vars = plan_on_tape(tape, params, states, cfg, plan_steps);
  GoalPlan out(vars.goals.size());
  for (std::size_t i = 0; i < vars.goals.size(); ++i) {
    out[i].reserve(vars.goals[i].size());
    for (const ad::Var& g : vars.goals[i]) {
      out[i].emplace_back(g.value()(0, 0), g.value()(1, 0));
    }
  }
  return out;
}

double inference_time(const PlannerParams& params,
                      const std::vector<env::State>& states,
                      const env::EnvConfig& cfg, int plan_steps,
                      int repetitions) {
  require(repetitions >= 1, "repetitions must be positive");
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repetitions; ++r) {
    volatile double sink = plan(params, states, cfg, plan_steps)[0][0].x();
    (void)sink;
  }
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - start).count() / repetitions;
}

}  // namespace stlswarm::planner
