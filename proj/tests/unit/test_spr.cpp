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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dyncomm/graph/stats.hpp"
#include "dyncomm/spr/dataset.hpp"
#include "dyncomm/spr/evaluate.hpp"
#include "dyncomm/train/spr_trainer.hpp"

namespace dyncomm {
namespace {

SprDataConfig small_data() {
  SprDataConfig c;
  c.nodes = 10;
  c.degree = 3;
  c.train = 40;
  c.val = 10;
  c.test = 10;
  return c;
}

NodeModelConfig small_model(AggregationKind agg) {
  NodeModelConfig c;
  c.obs_width = node_obs_width(10, 3);
  c.hidden = 8;
  c.encoder = {16};
  c.rounds = 2;
  c.agg = agg;
  return c;
}

TEST(SprData, LabelsAreDelayApsp) {
  const SprDataset ds = build_dataset(small_data(), 1);
  ASSERT_EQ(ds.train.size(), 40u);
  ASSERT_EQ(ds.val.size(), 10u);
  ASSERT_EQ(ds.test.size(), 10u);
  for (const auto& s : ds.val) {
    EXPECT_EQ(s.labels, apsp(s.graph, Metric::kDelay).cast<double>().eval());
    EXPECT_EQ(s.obs.rows(), 10);
    EXPECT_EQ(s.obs.cols(), node_obs_width(10, 3));
  }
}

TEST(SprData, DeterministicAndDisjointSplits) {
  const SprDataset a = build_dataset(small_data(), 2);
  const SprDataset b = build_dataset(small_data(), 2);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].graph.neighbors, b.train[i].graph.neighbors);
    EXPECT_EQ(a.train[i].obs, b.train[i].obs);
  }
  for (const auto& t : a.test) {
    for (const auto& s : a.train) EXPECT_NE(t.graph.positions, s.graph.positions);
  }
}

TEST(SprTrainer, MedianAndSpike) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  const std::vector<double> calm = {10.0, 5.0, 4.0, 3.0};
  EXPECT_EQ(find_spike(calm, 5.0), -1);
  const std::vector<double> spike = {10.0, 5.0, 4.0, 36.0, 3.0};
  // Median of {10, 5, 4} is 5, and 36 >= 25.
  EXPECT_EQ(find_spike(spike, 5.0), 3);
  const std::vector<double> edge = {2.0, 10.0};
  EXPECT_EQ(find_spike(edge, 5.0), 1);
}

TEST(SprTrainer, PredictShape) {
  const SprDataset ds = build_dataset(small_data(), 3);
  SprModel m(small_model(AggregationKind::kSum), 10, 3);
  Rng rng(1);
  m.init(rng);
  std::vector<const SprSample*> batch = {&ds.train[0], &ds.train[1], &ds.train[2]};
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  nn::Tape t(false);
  const nn::Var y = m.predict(batch, 3, Mode::kEval, seeds, t);
  EXPECT_EQ(y.rows(), 30);
  EXPECT_EQ(y.cols(), 10);
}

TEST(SprTrainer, LossDecreasesForEveryAggregation) {
  const SprDataset ds = build_dataset(small_data(), 4);
  for (auto agg : {AggregationKind::kSum, AggregationKind::kMean, AggregationKind::kGcn,
                   AggregationKind::kGat}) {
    SprModel m(small_model(agg), 10, 3);
    Rng rng(2);
    m.init(rng);
    SprTrainConfig cfg;
    cfg.seq_len = 3;
    cfg.batch = 8;
    cfg.iterations = 60;
    cfg.validate_every = 20;
    cfg.val_batch = 10;
    cfg.adamw.lr = 0.01;
    int points = 0;
    const SprTrainResult r = train_spr(m, ds, cfg, 5, [&](const SprCurvePoint&) { ++points; });
    ASSERT_EQ(r.curve.size(), 4u);
    EXPECT_EQ(points, 4);
    EXPECT_EQ(r.curve.front().iteration, 0);
    EXPECT_EQ(r.curve.back().iteration, 60);
    EXPECT_LT(r.curve.back().val_mse, r.curve.front().val_mse) << to_string(agg);
    EXPECT_NEAR(r.curve.back().val_mse, spr_mse(m, ds.val, 3, 10), 1e-12);
  }
}

TEST(SprEvaluate, PopulationStdAcrossModels) {
  const SprDataset ds = build_dataset(small_data(), 5);
  SprModel a(small_model(AggregationKind::kGat), 10, 3);
  SprModel b(small_model(AggregationKind::kGat), 10, 3);
  Rng r1(1), r2(2);
  a.init(r1);
  b.init(r2);
  std::vector<SprModel*> models = {&a, &b};
  const std::vector<int> lens = {1, 4};
  const auto rows = evaluate_spr(models, ds.test, lens, 4);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.per_model.size(), 2u);
    const double m = 0.5 * (row.per_model[0] + row.per_model[1]);
    EXPECT_NEAR(row.mean, m, 1e-12);
    EXPECT_NEAR(row.std, 0.5 * std::abs(row.per_model[0] - row.per_model[1]), 1e-12);
  }
  EXPECT_NEAR(rows[0].per_model[0], spr_mse(a, ds.test, 1, 4), 1e-12);
}

}  // namespace
}  // namespace dyncomm
