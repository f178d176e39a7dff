// Copyright 2026 The dyncomm Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "dyncomm/model/node_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dyncomm {

using nn::Matrix;
using nn::Var;

const char* to_string(CommMode m) {
  switch (m) {
    case CommMode::kMaximum: return "max";
    case CommMode::kController: return "controller";
    case CommMode::kMatched: return "matched";
  }
  return "?";
}

CommMode parse_comm_mode(const std::string& s) {
  if (s == "max") return CommMode::kMaximum;
  if (s == "controller") return CommMode::kController;
  if (s == "matched") return CommMode::kMatched;
  throw std::invalid_argument("unknown comm mode '" + s + "' (expected max|controller|matched)");
}

void BatchTopology::add_graph(const Geo2DGraph& g, const std::vector<char>& inactive) {
  if (g.L != L_ || g.D != D_) throw nn::DimensionError("topology: graph L/D mismatch");
  const int base = graphs_ * L_;
  for (int v = 0; v < L_; ++v) {
    for (int s = 0; s < D_; ++s) {
      const int u = g.neighbors[v][s];
      nbr_.push_back(base + u);
      rev_.push_back(g.slot_of(u, v));
    }
    active_.push_back(inactive.empty() || !inactive[v] ? 1 : 0);
  }
  ++graphs_;
}

void BatchTopology::set_inactive(int graph, const std::vector<char>& inactive) {
  for (int v = 0; v < L_; ++v) active_[graph * L_ + v] = inactive[v] ? 0 : 1;
}

int MessageLog::total() const { return std::accumulate(sent.begin(), sent.end(), 0); }

int MessageLog::round_total(int k) const {
  int n = 0;
  for (std::size_t i = k; i < sent.size(); i += rounds) n += sent[i];
  return n;
}

int MessageLog::node_total(int r) const {
  return std::accumulate(sent.begin() + r * rounds, sent.begin() + (r + 1) * rounds, 0);
}

NodeModel::NodeModel(NodeModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (cfg_.encoder.empty()) throw std::invalid_argument("encoder needs at least one layer");
  std::vector<int> dims = {cfg_.obs_width};
  dims.insert(dims.end(), cfg_.encoder.begin(), cfg_.encoder.end());
  encoder_ = nn::Mlp("enc", dims, nn::Activation::kLeakyRelu, cfg_.mlp_slope);
  gru_a_ = nn::GruCell("gru_a", dims.back(), cfg_.hidden);
  gru_b_ = nn::GruCell("gru_b", cfg_.hidden, cfg_.hidden);
  cfg_.controller.hidden = cfg_.hidden;
  if (cfg_.comm == CommMode::kMatched && cfg_.matched_p.empty()) {
    throw std::invalid_argument("matched communication needs matched_p");
  }
}

void NodeModel::init(nn::ParamSet& params, Rng& rng) const {
  const int H = cfg_.hidden;
  encoder_.init(params, rng);
  gru_a_.init(params, rng);
  gru_b_.init(params, rng);
  if (cfg_.agg == AggregationKind::kGcn) {
    params.add("gcn.weight", nn::xavier_uniform(H, H, rng));
  } else if (cfg_.agg == AggregationKind::kGat) {
    params.add("gat.weight", nn::xavier_uniform(H, H, rng));
    const Matrix a = nn::xavier_uniform(2 * H, 1, rng);
    params.add("gat.a_self", a.topRows(H));
    params.add("gat.a_nbr", a.bottomRows(H));
  }
  if (cfg_.comm == CommMode::kController) init_controller(params, cfg_.controller, rng);
}

Var NodeModel::encode(const Var& obs, nn::ParamSet& params) const {
  return encoder_.forward(obs, params);
}

NodeStepOutput NodeModel::step(const Var& m, const Var& carry_in, const BatchTopology& topo,
                               nn::ParamSet& params, Mode mode,
                               std::span<const std::uint64_t> seeds) const {
  nn::Tape& t = *m.tape();
  const int N = topo.rows();
  const int D = topo.D();
  const int L = topo.L();
  const int H = cfg_.hidden;
  const int K = cfg_.rounds;
  if (m.rows() != N || carry_in.rows() != N) {
    throw nn::DimensionError("node step: expected " + std::to_string(N) + " rows");
  }
  if (carry_in.cols() != H) throw nn::DimensionError("node step: carry width != hidden");
  if (static_cast<int>(seeds.size()) != topo.graphs()) {
    throw std::invalid_argument("node step: need one seed per graph");
  }
  std::vector<Rng> noise_rng;
  std::vector<Rng> matched_rng;
  for (std::uint64_t sd : seeds) {
    noise_rng.push_back(Rng::stream(sd, "controller-noise"));
    matched_rng.push_back(Rng::stream(sd, "matched"));
  }
  const bool noisy = mode == Mode::kTrain && cfg_.controller.noise_scale > 0.0;

  NodeStepOutput out;
  out.log.rounds = K;
  out.log.sent.assign(static_cast<std::size_t>(N) * K, 0);

  Var carry = gru_a_.step(m, carry_in, params);

  Var zero = t.constant(Matrix::Zero(N, H));
  std::vector<Var> recv(D, zero);
  std::vector<char> halted(topo.graphs(), 0);

  Matrix deg_inv_sqrt = Matrix::Zero(N, 1);
  for (int r = 0; r < N; ++r) {
    if (!topo.active(r)) continue;
    int deg = 0;
    for (int s = 0; s < D; ++s) deg += topo.active(topo.nbr(r, s)) ? 1 : 0;
    if (deg > 0) deg_inv_sqrt(r, 0) = 1.0 / std::sqrt(static_cast<double>(deg));
  }

  for (int k = 0; k < K; ++k) {
    Matrix T = Matrix::Zero(N, D);
    std::vector<int> src_rows(static_cast<std::size_t>(N) * D, -1);
    std::vector<Var> gate(D);
    const bool gated = cfg_.comm == CommMode::kController && k >= 1;
    Var probs;
    if (gated) {
      std::vector<Var> parts = {carry};
      parts.insert(parts.end(), recv.begin(), recv.end());
      Matrix noise;
      if (noisy) {
        noise.resize(static_cast<Eigen::Index>(N) * (D + 1), 1);
        for (Eigen::Index i = 0; i < noise.rows(); ++i) {
          noise(i, 0) = cfg_.controller.noise_scale * noise_rng[i / (L * (D + 1))].normal();
        }
      }
      ControllerOutput c = controller_forward(nn::interleave_rows(parts), D + 1, params,
                                              cfg_.controller, noisy ? &noise : nullptr);
      probs = c.probs;
      out.gate_probs.push_back(probs.value());
    }
    const double p_k = cfg_.comm == CommMode::kMatched
                           ? cfg_.matched_p[std::min<std::size_t>(k, cfg_.matched_p.size() - 1)]
                           : 1.0;
    for (int r = 0; r < N; ++r) {
      for (int s = 0; s < D; ++s) {
        const bool draw = cfg_.comm == CommMode::kMatched ? matched_rng[r / L].bernoulli(p_k) : true;
        const int j = topo.nbr(r, s);
        if (!topo.active(r) || !topo.active(j) || halted[r / L]) continue;
        bool send = draw;
        if (gated) send = probs.value()(j, 1 + topo.rev(r, s)) > 0.5;
        if (!send) continue;
        T(r, s) = 1.0;
        src_rows[r * D + s] = j;
        out.log.sent[static_cast<std::size_t>(j) * K + k] += 1;
      }
    }
    Eigen::VectorXd update = Eigen::VectorXd::Ones(N);
    bool any_halt = false;
    if (gated) {
      for (int b = 0; b < topo.graphs(); ++b) {
        if (halted[b]) continue;
        if (T.middleRows(b * L, L).sum() == 0.0) halted[b] = 1;
      }
      for (int r = 0; r < N; ++r) {
        if (halted[r / L]) {
          update[r] = 0.0;
          any_halt = true;
        }
      }
    }

    std::vector<Var> msgs(D);
    for (int s = 0; s < D; ++s) {
      std::vector<int> idx(N);
      for (int r = 0; r < N; ++r) idx[r] = src_rows[r * D + s];
      msgs[s] = nn::gather_rows(carry, idx);
      if (gated) {
        std::vector<int> cols(N);
        for (int r = 0; r < N; ++r) cols[r] = 1 + topo.rev(r, s);
        msgs[s] = nn::mul_col(nn::gather_entries(probs, idx, cols), msgs[s]);
      }
    }

    Var agg;
    switch (cfg_.agg) {
      case AggregationKind::kSum:
        agg = aggregate_sum(msgs);
        break;
      case AggregationKind::kMean:
        agg = aggregate_mean(msgs, T);
        break;
      case AggregationKind::kGcn: {
        Matrix coef = Matrix::Zero(N, D);
        for (int r = 0; r < N; ++r) {
          for (int s = 0; s < D; ++s) {
            if (T(r, s) != 0.0) coef(r, s) = deg_inv_sqrt(r, 0) * deg_inv_sqrt(topo.nbr(r, s), 0);
          }
        }
        agg = gcn_aggregate(msgs, coef, t.param(params.get("gcn.weight")), cfg_.mlp_slope);
        break;
      }
      case AggregationKind::kGat: {
        GatOutput g = gat_aggregate(carry, msgs, T, t.param(params.get("gat.weight")),
                                    t.param(params.get("gat.a_self")),
                                    t.param(params.get("gat.a_nbr")), cfg_.gat_slope,
                                    cfg_.gat_exclude_self);
        agg = g.messages;
        out.alpha = g.alpha;
        break;
      }
    }
    Var next = gru_b_.step(agg, carry, params);
    carry = any_halt ? nn::blend_rows(carry, next, update) : next;
    for (int s = 0; s < D; ++s) {
      if (T.col(s).any()) recv[s] = nn::blend_rows(recv[s], msgs[s], T.col(s));
    }
    out.transmit.push_back(std::move(T));
  }

  std::vector<Var> parts = {carry};
  parts.insert(parts.end(), recv.begin(), recv.end());
  out.psi = nn::concat_cols(parts);
  out.carry = carry;
  return out;
}

NodeStepOutput node_state_update(const NodeModel& model, nn::ParamSet& params, const Var& obs,
                                 const Var& carry, const Geo2DGraph& g,
                                 const std::vector<char>& inactive, Mode mode,
                                 std::uint64_t seed) {
  BatchTopology topo(g.L, g.D);
  topo.add_graph(g, inactive);
  Var m = model.encode(obs, params);
  return model.step(m, carry, topo, params, mode, std::span<const std::uint64_t>(&seed, 1));
}

}  // namespace dyncomm
