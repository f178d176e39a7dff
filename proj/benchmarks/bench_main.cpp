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

#include <benchmark/benchmark.h>

#include <vector>

#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/graph/graph.hpp"
#include "dyncomm/model/node_model.hpp"
#include "dyncomm/nn/layers.hpp"
#include "dyncomm/nn/optim.hpp"
#include "dyncomm/spr/dataset.hpp"
#include "dyncomm/train/spr_trainer.hpp"

namespace dyncomm {
namespace {

using nn::Matrix;

Matrix filled(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const Matrix a = filled(n, n, rng), b = filled(n, n, rng);
  for (auto _ : state) {
    nn::Tape t(false);
    benchmark::DoNotOptimize(nn::matmul(t.constant(a), t.constant(b)).value().data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(640);

// Batch of 32 graphs x 20 nodes, hidden 64.
void BM_GruStep(benchmark::State& state) {
  const bool record = state.range(0) != 0;
  Rng rng(2);
  nn::GruCell cell("gru", 64, 64);
  nn::ParamSet ps;
  cell.init(ps, rng);
  const Matrix x = filled(640, 64, rng), h = filled(640, 64, rng);
  for (auto _ : state) {
    nn::Tape t(record);
    nn::Var out = cell.step(t.constant(x), t.constant(h), ps);
    if (record) {
      ps.zero_grad();
      t.backward(nn::sum(out));
    }
    benchmark::DoNotOptimize(out.value().data());
  }
}
BENCHMARK(BM_GruStep)->Arg(0)->Arg(1)->ArgNames({"backward"});

void BM_NodeStep(benchmark::State& state) {
  NodeModelConfig nc;
  nc.comm = state.range(0) ? CommMode::kController : CommMode::kMaximum;
  NodeModel model(nc);
  nn::ParamSet ps;
  Rng rng(3);
  model.init(ps, rng);
  const Geo2DGraph g = generate_graph(20, 3, rng);
  RoutingEnv env;
  env.reset(g, rng);
  const Matrix obs = env.node_observations();
  const Matrix carry = Matrix::Zero(20, nc.hidden);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    nn::Tape t(false);
    NodeStepOutput o = node_state_update(model, ps, t.constant(obs), t.constant(carry), g,
                                         env.inactive(), Mode::kTrain, ++seed);
    benchmark::DoNotOptimize(o.psi.value().data());
  }
}
BENCHMARK(BM_NodeStep)->Arg(0)->Arg(1)->ArgNames({"controller"});

// One SPR training iteration: batch 32, sequence 8, four rounds.
void BM_SprIteration(benchmark::State& state) {
  SprDataConfig dc;
  dc.train = 32;
  dc.val = 1;
  dc.test = 1;
  const SprDataset ds = build_dataset(dc, 4);
  NodeModelConfig nc;
  nc.agg = static_cast<AggregationKind>(state.range(0));
  SprModel m(nc, 20, 3);
  Rng rng(5);
  m.init(rng);
  std::vector<const SprSample*> batch;
  Matrix labels(32 * 20, 20);
  for (int b = 0; b < 32; ++b) {
    batch.push_back(&ds.train[b]);
    labels.middleRows(b * 20, 20) = ds.train[b].labels;
  }
  std::vector<std::uint64_t> seeds(32);
  for (auto _ : state) {
    nn::Tape t;
    nn::Var loss = nn::mse(m.predict(batch, 8, Mode::kTrain, seeds, t), labels);
    m.params.zero_grad();
    t.backward(loss);
    nn::clip_grad_norm(m.params, 1.0);
    nn::adamw_step(m.params, nn::AdamWConfig{});
    benchmark::DoNotOptimize(loss.value().data());
  }
}
BENCHMARK(BM_SprIteration)
    ->Arg(static_cast<int>(AggregationKind::kSum))
    ->Arg(static_cast<int>(AggregationKind::kGat))
    ->ArgNames({"agg"})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dyncomm

BENCHMARK_MAIN();
