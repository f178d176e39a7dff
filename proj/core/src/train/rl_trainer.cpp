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
#include "dyncomm/train/rl_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dyncomm/nn/checkpoint.hpp"

namespace dyncomm {

using nn::Matrix;
using nn::Var;

RoutingAgent::RoutingAgent(const NodeModelConfig& node_cfg, const QNetConfig& q_cfg)
    : model(node_cfg), nets(q_cfg) {}

void RoutingAgent::init(Rng& rng) {
  theta_u = nn::ParamSet();
  model.init(theta_u, rng);
  nets.init(rng);
}

void RoutingAgent::save(const std::filesystem::path& path, const std::string& meta) const {
  auto& self = const_cast<RoutingAgent&>(*this);
  nn::save_checkpoint(path,
                      {{"node/", &self.theta_u}, {"behaviour/", &self.nets.behaviour},
                       {"target/", &self.nets.target}},
                      meta);
}

std::string RoutingAgent::load(const std::filesystem::path& path) {
  return nn::load_checkpoint(
      path, {{"node/", &theta_u}, {"behaviour/", &nets.behaviour}, {"target/", &nets.target}});
}

bool is_decision_state(const Packet& p, const std::vector<char>& inactive) {
  return !p.on_edge && !inactive[p.current];
}

namespace {

Matrix gather_psi(const Matrix& psi, const std::vector<Packet>& packets, int row_offset) {
  Matrix out(static_cast<Eigen::Index>(packets.size()), psi.cols());
  for (std::size_t i = 0; i < packets.size(); ++i) out.row(i) = psi.row(row_offset + packets[i].current);
  return out;
}

}  // namespace

ActResult act(RoutingAgent& agent, const Geo2DGraph& g, const EnvSnapshot& snap,
              const Matrix& carry, Mode mode, std::uint64_t seed, double epsilon, Rng& explore) {
  nn::Tape t(false);
  NodeStepOutput out =
      node_state_update(agent.model, agent.theta_u, t.constant(node_observations(g, snap)),
                        t.constant(carry), g, snap.inactive, mode, seed);
  const Matrix& psi = out.psi.value();
  const Matrix q = q_forward(agent.nets, agent_observations(g, snap), gather_psi(psi, snap.packets, 0),
                             false);
  ActResult res;
  const auto P = snap.packets.size();
  res.actions.assign(P, 0);
  res.acting.assign(P, 0);
  double qsum = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    if (!is_decision_state(snap.packets[i], snap.inactive)) continue;
    res.acting[i] = 1;
    std::span<const double> row(q.row(i).data(), static_cast<std::size_t>(q.cols()));
    res.actions[i] = select_action(row, epsilon, explore);
    qsum += q.row(i).maxCoeff();
    ++res.n_acting;
  }
  res.q_mean = res.n_acting ? qsum / res.n_acting : std::numeric_limits<double>::quiet_NaN();
  res.carry = out.carry.value();
  res.log = std::move(out.log);
  return res;
}

TdBatchLoss td_loss(RoutingAgent& agent, const std::vector<ReplayMemory::Window>& windows,
                    int seq_len, double gamma, nn::Tape& tape) {
  if (windows.empty()) throw std::invalid_argument("td_loss: empty batch");
  const int B = static_cast<int>(windows.size());
  const Geo2DGraph& g0 = windows[0].episode->graph;
  const int L = g0.L;
  const int D = g0.D;
  const int H = agent.model.config().hidden;
  const int J = seq_len;
  const int P = static_cast<int>(windows[0].episode->steps[0].snap.packets.size());

  auto rec = [&](int b, int i) -> const StepRecord& {
    return windows[b].episode->steps[windows[b].start + i];
  };

  Matrix carry0(static_cast<Eigen::Index>(B) * L, H);
  for (int b = 0; b < B; ++b) carry0.middleRows(b * L, L) = rec(b, 0).carry;
  Var carry = tape.constant(std::move(carry0));

  std::vector<Var> psis;
  for (int i = 0; i <= J; ++i) {
    BatchTopology topo(L, D);
    Matrix obs(static_cast<Eigen::Index>(B) * L, agent.model.config().obs_width);
    std::vector<std::uint64_t> seeds(B);
    for (int b = 0; b < B; ++b) {
      const StepRecord& r = rec(b, i);
      topo.add_graph(windows[b].episode->graph, r.snap.inactive);
      obs.middleRows(b * L, L) = node_observations(windows[b].episode->graph, r.snap);
      seeds[b] = r.seed;
    }
    Var m = agent.model.encode(tape.constant(std::move(obs)), agent.theta_u);
    NodeStepOutput out = agent.model.step(m, carry, topo, agent.theta_u, Mode::kTrain, seeds);
    psis.push_back(out.psi);
    carry = out.carry;
  }

  TdBatchLoss res;
  res.q_taken.resize(static_cast<Eigen::Index>(B) * P, J);
  res.targets.resize(static_cast<Eigen::Index>(B) * P, J);
  Var total;
  for (int i = 0; i < J; ++i) {
    Matrix aobs(static_cast<Eigen::Index>(B) * P, agent.nets.config().agent_obs_width);
    Matrix aobs_next(aobs.rows(), aobs.cols());
    std::vector<int> cur(B * P), nxt(B * P), actions(B * P);
    Matrix y(static_cast<Eigen::Index>(B) * P, 1);
    for (int b = 0; b < B; ++b) {
      const Geo2DGraph& g = windows[b].episode->graph;
      const StepRecord& r = rec(b, i);
      const StepRecord& rn = rec(b, i + 1);
      aobs.middleRows(b * P, P) = agent_observations(g, r.snap);
      aobs_next.middleRows(b * P, P) = agent_observations(g, rn.snap);
      for (int p = 0; p < P; ++p) {
        cur[b * P + p] = b * L + r.snap.packets[p].current;
        nxt[b * P + p] = b * L + rn.snap.packets[p].current;
        actions[b * P + p] = r.actions[p];
      }
    }
    // Target: behaviour node model output for the next step, detached,
    // evaluated by the target Q network.
    Matrix q_next;
    {
      nn::Tape tt(false);
      Matrix psi_next(static_cast<Eigen::Index>(B) * P, psis[i + 1].cols());
      for (int k = 0; k < B * P; ++k) psi_next.row(k) = psis[i + 1].value().row(nxt[k]);
      q_next = agent.nets.forward(tt.constant(aobs_next), tt.constant(std::move(psi_next)),
                                  agent.nets.target)
                   .value();
    }
    for (int b = 0; b < B; ++b) {
      const StepRecord& r = rec(b, i);
      const StepRecord& rn = rec(b, i + 1);
      for (int p = 0; p < P; ++p) {
        const int k = b * P + p;
        double boot = 0.0;
        if (!r.done[p]) {
          boot = is_decision_state(rn.snap.packets[p], rn.snap.inactive) ? q_next.row(k).maxCoeff()
                                                                          : q_next(k, 0);
        }
        y(k, 0) = r.rewards[p] + gamma * boot;
      }
    }
    Var psi_cur = nn::gather_rows(psis[i], cur);
    Var q = agent.nets.forward(tape.constant(std::move(aobs)), psi_cur, agent.nets.behaviour);
    Var q_taken = nn::pick_cols(q, actions);
    res.q_taken.col(i) = q_taken.value().col(0);
    res.targets.col(i) = y.col(0);
    Var term = nn::mse(q_taken, y);
    total = total.valid() ? nn::add(total, term) : term;
  }
  res.loss = nn::scale(total, 1.0 / J);
  return res;
}

std::vector<Matrix> replay_carries(RoutingAgent& agent, const ReplayMemory::Window& w,
                                   int seq_len) {
  std::vector<Matrix> out;
  Matrix carry = w.episode->steps[w.start].carry;
  for (int i = 0; i < seq_len; ++i) {
    const StepRecord& r = w.episode->steps[w.start + i];
    nn::Tape t(false);
    NodeStepOutput o = node_state_update(agent.model, agent.theta_u,
                                         t.constant(node_observations(w.episode->graph, r.snap)),
                                         t.constant(carry), w.episode->graph, r.snap.inactive,
                                         Mode::kTrain, r.seed);
    carry = o.carry.value();
    out.push_back(carry);
  }
  return out;
}

QNetConfig q_config(const RlConfig& c) {
  QNetConfig q;
  q.agent_obs_width = agent_obs_width(c.nodes, c.degree, c.env.n_packets);
  q.psi_width = c.node.hidden * (c.degree + 1);
  q.encoder = c.q_encoder;
  q.n_actions = c.degree + 1;
  q.slope = c.node.mlp_slope;
  return q;
}

namespace {

NodeModelConfig with_obs_width(NodeModelConfig c, int L, int D) {
  c.obs_width = node_obs_width(L, D);
  return c;
}

double tail_mean(const std::vector<double>& v, std::size_t n) {
  double s = 0.0;
  std::size_t k = 0;
  for (std::size_t i = v.size() > n ? v.size() - n : 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      s += v[i];
      ++k;
    }
  }
  return k ? s / k : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

RlTrainer::RlTrainer(RlConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      agent_(with_obs_width(cfg_.node, cfg_.nodes, cfg_.degree), q_config(cfg_)),
      memory_(cfg_.replay_capacity, cfg_.seq_len),
      graph_rng_(Rng::stream(seed, "graphgen")),
      env_rng_(Rng::stream(seed, "env")),
      explore_rng_(Rng::stream(seed, "exploration")),
      seed_rng_(Rng::stream(seed, "controller-noise")),
      sample_rng_(Rng::stream(seed, "replay")),
      env_(cfg_.env) {
  if (cfg_.episode_steps < cfg_.seq_len) {
    throw std::invalid_argument("episode_steps must be >= seq_len");
  }
  Rng init = Rng::stream(seed, "init");
  agent_.init(init);
}

std::optional<double> RlTrainer::train_batch() {
  if (memory_.empty()) return std::nullopt;
  const auto windows = memory_.sample(static_cast<std::size_t>(cfg_.batch), sample_rng_);
  nn::Tape tape;
  TdBatchLoss td = td_loss(agent_, windows, cfg_.seq_len, cfg_.gamma, tape);
  agent_.theta_u.zero_grad();
  agent_.nets.behaviour.zero_grad();
  tape.backward(td.loss);
  if (cfg_.clip > 0.0) {
    last_norm_u_ = nn::clip_grad_norm(agent_.theta_u, cfg_.clip);
    last_norm_q_ = nn::clip_grad_norm(agent_.nets.behaviour, cfg_.clip);
  } else {
    last_norm_u_ = nn::grad_norm(agent_.theta_u);
    last_norm_q_ = nn::grad_norm(agent_.nets.behaviour);
  }
  nn::adamw_step(agent_.theta_u, cfg_.adamw);
  nn::adamw_step(agent_.nets.behaviour, cfg_.adamw);
  soft_update_target(agent_.nets, cfg_.tau);
  last_loss_ = td.loss.value()(0, 0);
  return last_loss_;
}

EpisodeStats RlTrainer::collect_episode() {
  const Geo2DGraph g = generate_graph(cfg_.nodes, cfg_.degree, graph_rng_, cfg_.graphgen);
  env_.reset(g, env_rng_);
  auto ep = std::make_shared<EpisodeRecord>();
  ep->graph = g;
  Matrix carry = Matrix::Zero(g.L, cfg_.node.hidden);
  EpisodeStats st;
  double msgs = 0.0;
  for (int t = 0; t < cfg_.episode_steps; ++t) {
    if (running_ && step_ >= cfg_.total_steps) break;
    const std::uint64_t seed = seed_rng_.next_u64();
    const double eps = cfg_.epsilon(step_);
    StepRecord rec;
    rec.snap = env_.snapshot();
    rec.carry = carry;
    rec.seed = seed;
    ActResult ar = act(agent_, g, rec.snap, carry, Mode::kTrain, seed, eps, explore_rng_);
    StepResult res = env_.step(ar.actions);
    rec.actions = ar.actions;
    rec.rewards = res.rewards;
    rec.done = res.done;
    ep->steps.push_back(std::move(rec));
    carry = std::move(ar.carry);

    const double r = std::accumulate(res.rewards.begin(), res.rewards.end(), 0.0);
    const double m = ar.log.per_node(g.L);
    st.reward += r;
    st.deliveries += static_cast<int>(res.events.deliveries.size());
    ++st.steps;
    msgs += m;
    step_rewards_.push_back(r);
    step_q_.push_back(ar.q_mean);
    step_msgs_.push_back(m);
    ++step_;

    if (training_ && step_ >= cfg_.epsilon.warmup && step_ % cfg_.train_every == 0 &&
        memory_.size() >= static_cast<std::size_t>(cfg_.batch)) {
      train_batch();
    }
    if (on_log_ && cfg_.log_every > 0 && step_ % cfg_.log_every == 0) {
      on_log_({step_, last_loss_, cfg_.epsilon(step_), tail_mean(step_rewards_, 500),
               tail_mean(step_q_, 500), tail_mean(step_msgs_, 500)});
    }
    if (on_checkpoint_ && cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0) {
      on_checkpoint_(step_);
    }
  }
  StepRecord last;
  last.snap = env_.snapshot();
  last.carry = carry;
  last.seed = seed_rng_.next_u64();
  ep->steps.push_back(std::move(last));
  memory_.add_episode(ep);
  st.messages_per_node = st.steps ? msgs / st.steps : 0.0;
  return st;
}

void RlTrainer::run(const std::function<void(const RlLogRow&)>& on_log,
                    const std::function<void(std::int64_t)>& on_checkpoint) {
  on_log_ = on_log ? on_log : [](const RlLogRow&) {};
  on_checkpoint_ = on_checkpoint;
  running_ = true;
  while (step_ < cfg_.total_steps) collect_episode();
  running_ = false;
  on_log_ = nullptr;
  on_checkpoint_ = nullptr;
}

}  // namespace dyncomm
