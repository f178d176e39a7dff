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
#include "dyncomm/train/spr_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dyncomm/env/routing_env.hpp"

namespace dyncomm {

using nn::Matrix;
using nn::Var;

namespace {

NodeModelConfig with_obs(NodeModelConfig c, int L, int D) {
  c.obs_width = node_obs_width(L, D);
  return c;
}

}  // namespace

SprModel::SprModel(const NodeModelConfig& node_cfg, int L_, int D_)
    : model(with_obs(node_cfg, L_, D_)),
      L(L_),
      D(D_),
      readout_("readout", {node_cfg.hidden * (D_ + 1), L_}, nn::Activation::kIdentity) {}

void SprModel::init(Rng& rng) {
  params = nn::ParamSet();
  model.init(params, rng);
  readout_.init(params, rng);
}

Var SprModel::predict(std::span<const SprSample* const> batch, int seq_len, Mode mode,
                      std::span<const std::uint64_t> seeds, nn::Tape& tape) {
  if (seq_len < 1) throw std::invalid_argument("seq_len must be >= 1");
  const int B = static_cast<int>(batch.size());
  const int H = model.config().hidden;
  BatchTopology topo(L, D);
  Matrix obs(static_cast<Eigen::Index>(B) * L, model.config().obs_width);
  for (int b = 0; b < B; ++b) {
    topo.add_graph(batch[b]->graph, {});
    obs.middleRows(b * L, L) = batch[b]->obs;
  }
  Var m = model.encode(tape.constant(std::move(obs)), params);
  Var carry = tape.constant(Matrix::Zero(static_cast<Eigen::Index>(B) * L, H));
  Var psi;
  std::vector<std::uint64_t> step_seeds(B);
  for (int t = 0; t < seq_len; ++t) {
    for (int b = 0; b < B; ++b) step_seeds[b] = splitmix64(seeds[b] + static_cast<std::uint64_t>(t));
    NodeStepOutput out = model.step(m, carry, topo, params, mode, step_seeds);
    carry = out.carry;
    psi = out.psi;
  }
  return readout_.forward(psi, params);
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

int find_spike(std::span<const double> values, double factor) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double med = median(std::vector<double>(values.begin(), values.begin() + i));
    if (values[i] >= factor * med) return static_cast<int>(i);
  }
  return -1;
}

double spr_mse(SprModel& m, std::span<const SprSample> samples, int seq_len, int batch) {
  double sse = 0.0;
  double count = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += batch) {
    const std::size_t end = std::min(samples.size(), start + batch);
    std::vector<const SprSample*> ptrs;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = start; i < end; ++i) {
      ptrs.push_back(&samples[i]);
      seeds.push_back(i);
    }
    nn::Tape t(false);
    const Matrix pred = m.predict(ptrs, seq_len, Mode::kEval, seeds, t).value();
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      sse += (pred.middleRows(i * m.L, m.L) - ptrs[i]->labels).squaredNorm();
      count += static_cast<double>(ptrs[i]->labels.size());
    }
  }
  return count > 0 ? sse / count : 0.0;
}

SprTrainResult train_spr(SprModel& m, const SprDataset& ds, const SprTrainConfig& cfg,
                         std::uint64_t seed,
                         const std::function<void(const SprCurvePoint&)>& on_point) {
  if (ds.train.empty()) throw std::invalid_argument("train_spr: empty training split");
  Rng sample_rng = Rng::stream(seed, "spr-batch");
  Rng seed_rng = Rng::stream(seed, "controller-noise");
  SprTrainResult res;
  std::vector<double> vals;
  double loss_acc = 0.0;
  int loss_n = 0;
  double norm_max = 0.0;

  auto validate = [&](int it) {
    SprCurvePoint p;
    p.iteration = it;
    p.train_loss = loss_n ? loss_acc / loss_n : std::nan("");
    p.val_mse = spr_mse(m, ds.val, cfg.seq_len, cfg.val_batch);
    p.grad_norm = norm_max;
    loss_acc = 0.0;
    loss_n = 0;
    norm_max = 0.0;
    res.curve.push_back(p);
    vals.push_back(p.val_mse);
    if (on_point) on_point(p);
    if (res.spike_iteration < 0 && find_spike(vals, cfg.spike_factor) == static_cast<int>(vals.size()) - 1) {
      res.spike_iteration = it;
    }
  };

  validate(0);
  for (int it = 1; it <= cfg.iterations; ++it) {
    std::vector<const SprSample*> batch;
    std::vector<std::uint64_t> seeds;
    Matrix labels(static_cast<Eigen::Index>(cfg.batch) * m.L, m.L);
    for (int b = 0; b < cfg.batch; ++b) {
      const auto& s = ds.train[sample_rng.uniform_int(0, static_cast<std::int64_t>(ds.train.size()) - 1)];
      batch.push_back(&s);
      seeds.push_back(seed_rng.next_u64());
      labels.middleRows(b * m.L, m.L) = s.labels;
    }
    nn::Tape tape;
    Var loss = nn::mse(m.predict(batch, cfg.seq_len, Mode::kTrain, seeds, tape), labels);
    m.params.zero_grad();
    tape.backward(loss);
    const double norm = cfg.clip > 0.0 ? nn::clip_grad_norm(m.params, cfg.clip) : nn::grad_norm(m.params);
    nn::adamw_step(m.params, cfg.adamw);
    loss_acc += loss.value()(0, 0);
    ++loss_n;
    norm_max = std::max(norm_max, norm);
    if (it % cfg.validate_every == 0 || it == cfg.iterations) {
      validate(it);
      if (cfg.stop_on_spike && res.spike_iteration >= 0) break;
    }
  }
  return res;
}

}  // namespace dyncomm
