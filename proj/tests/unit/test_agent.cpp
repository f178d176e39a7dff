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
#include <filesystem>
#include <memory>
#include <vector>

#include "dyncomm/agent/dqn.hpp"
#include "dyncomm/train/replay.hpp"
#include "dyncomm/train/rl_trainer.hpp"

namespace dyncomm {
namespace {

using nn::Matrix;

RlConfig tiny_config() {
  RlConfig c;
  c.nodes = 10;
  c.degree = 3;
  c.env.n_packets = 5;
  c.node.hidden = 8;
  c.node.encoder = {16};
  c.node.rounds = 2;
  c.node.controller.heads = 2;
  c.q_encoder = {16};
  c.episode_steps = 12;
  c.seq_len = 4;
  c.batch = 4;
  c.total_steps = 48;
  c.train_every = 4;
  c.replay_capacity = 100;
  c.epsilon.warmup = 0;
  c.epsilon.decay_every = 1;
  return c;
}

TEST(Dqn, ArgmaxTakesFirstMaximum) {
  const std::vector<double> q = {1.0, 3.0, 3.0, 2.0};
  EXPECT_EQ(argmax_first(q), 1);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(q, 0.0, rng), 1);
}

TEST(Dqn, FullEpsilonIsUniform) {
  const std::vector<double> q = {0.0, 5.0, 0.0, 0.0};
  Rng rng(2);
  std::vector<int> hits(4, 0);
  for (int i = 0; i < 8000; ++i) ++hits[select_action(q, 1.0, rng)];
  for (int h : hits) EXPECT_NEAR(h / 8000.0, 0.25, 0.03);
}

TEST(Dqn, EpsilonSchedule) {
  EpsilonSchedule e;
  e.initial = 1.0;
  e.minimum = 0.1;
  e.decay = 0.5;
  e.decay_every = 10;
  e.warmup = 100;
  EXPECT_EQ(e(0), 1.0);
  EXPECT_EQ(e(99), 1.0);
  EXPECT_EQ(e(100), 1.0);
  EXPECT_EQ(e(109), 1.0);
  EXPECT_EQ(e(110), 0.5);
  EXPECT_EQ(e(125), 0.25);
  EXPECT_EQ(e(1000), 0.1);
}

TEST(Dqn, SoftUpdateInterpolates) {
  QNetConfig c;
  c.agent_obs_width = 3;
  c.psi_width = 2;
  c.encoder = {4};
  c.n_actions = 2;
  QNets nets(c);
  Rng rng(3);
  nets.init(rng);
  EXPECT_EQ(nets.behaviour[0].value, nets.target[0].value);
  const Matrix before = nets.target[0].value;
  nets.behaviour[0].value.array() += 1.0;
  soft_update_target(nets, 0.25);
  EXPECT_LE((nets.target[0].value - (before.array() + 0.25).matrix()).cwiseAbs().maxCoeff(), 1e-15);
  nets.sync_target();
  EXPECT_EQ(nets.behaviour[0].value, nets.target[0].value);
}

TEST(Dqn, ForwardShapesAndErrors) {
  QNetConfig c;
  c.agent_obs_width = 3;
  c.psi_width = 2;
  c.encoder = {4};
  c.n_actions = 4;
  QNets nets(c);
  Rng rng(4);
  nets.init(rng);
  const Matrix q = q_forward(nets, Matrix::Ones(5, 3), Matrix::Ones(5, 2), false);
  EXPECT_EQ(q.rows(), 5);
  EXPECT_EQ(q.cols(), 4);
  EXPECT_THROW(q_forward(nets, Matrix::Ones(5, 4), Matrix::Ones(5, 2), false), nn::DimensionError);
  EXPECT_THROW(q_forward(nets, Matrix::Ones(5, 3), Matrix::Ones(4, 2), true), nn::DimensionError);
}

std::shared_ptr<EpisodeRecord> fake_episode(int T) {
  auto ep = std::make_shared<EpisodeRecord>();
  ep->steps.resize(T + 1);
  for (int t = 0; t <= T; ++t) ep->steps[t].seed = static_cast<std::uint64_t>(t);
  return ep;
}

TEST(Replay, WindowsAndFifoEviction) {
  ReplayMemory mem(10, 4);
  EXPECT_EQ(mem.add_episode(fake_episode(3)), 0u);
  EXPECT_EQ(mem.add_episode(fake_episode(6)), 3u);
  EXPECT_EQ(mem.size(), 3u);
  auto last = fake_episode(12);
  EXPECT_EQ(mem.add_episode(last), 9u);
  EXPECT_EQ(mem.size(), 10u);
  EXPECT_EQ(mem.inserted(), 12u);
  // The two oldest windows were evicted; one window of the first episode remains.
  EXPECT_EQ(mem.at(0).start, 2);
  EXPECT_EQ(mem.at(1).episode, last);
  EXPECT_EQ(mem.at(9).start, 8);
}

TEST(Replay, SamplingIsSeededAndInRange) {
  ReplayMemory mem(100, 2);
  mem.add_episode(fake_episode(20));
  Rng a(5), b(5);
  const auto s1 = mem.sample(50, a);
  const auto s2 = mem.sample(50, b);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].start, s2[i].start);
    EXPECT_GE(s1[i].start, 0);
    EXPECT_LE(s1[i].start, 18);
  }
  ReplayMemory empty(4, 2);
  Rng c(1);
  EXPECT_TRUE(empty.sample(3, c).empty());
  EXPECT_THROW(ReplayMemory(0, 2), std::invalid_argument);
}

TEST(RlTrainer, EpisodeRecordsAndReplay) {
  RlConfig c = tiny_config();
  c.node.comm = CommMode::kController;
  RlTrainer tr(c, 7);
  tr.set_training(false);
  const EpisodeStats st = tr.collect_episode();
  EXPECT_EQ(st.steps, 12);
  ASSERT_EQ(tr.memory().size(), 9u);
  const auto& w = tr.memory().at(3);
  const auto carries = replay_carries(tr.agent(), w, c.seq_len);
  for (int i = 0; i < c.seq_len; ++i) {
    const Matrix& stored = w.episode->steps[w.start + i + 1].carry;
    EXPECT_LE((carries[i] - stored).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RlTrainer, TdTargetsUseRewardOnDone) {
  RlConfig c = tiny_config();
  c.episode_steps = 40;
  RlTrainer tr(c, 8);
  tr.set_training(false);
  tr.collect_episode();
  std::vector<ReplayMemory::Window> ws;
  for (std::size_t i = 0; i < tr.memory().size(); ++i) ws.push_back(tr.memory().at(i));
  nn::Tape tape;
  const TdBatchLoss td = td_loss(tr.agent(), ws, c.seq_len, c.gamma, tape);
  const int P = c.env.n_packets;
  ASSERT_EQ(td.targets.rows(), static_cast<Eigen::Index>(ws.size()) * P);
  ASSERT_EQ(td.targets.cols(), c.seq_len);
  int done_count = 0;
  for (std::size_t b = 0; b < ws.size(); ++b) {
    for (int i = 0; i < c.seq_len; ++i) {
      const StepRecord& r = ws[b].episode->steps[ws[b].start + i];
      for (int p = 0; p < P; ++p) {
        if (!r.done[p]) continue;
        ++done_count;
        EXPECT_EQ(td.targets(static_cast<Eigen::Index>(b) * P + p, i), r.rewards[p]);
      }
    }
  }
  EXPECT_GT(done_count, 0);
  EXPECT_TRUE(std::isfinite(td.loss.value()(0, 0)));
}

TEST(RlTrainer, TrainingRunsAndStaysFinite) {
  RlConfig c = tiny_config();
  RlTrainer tr(c, 9);
  int rows = 0;
  tr.run([&](const RlLogRow& r) {
    ++rows;
    EXPECT_TRUE(std::isfinite(r.loss));
  });
  EXPECT_EQ(tr.step(), 48);
  EXPECT_EQ(tr.step_rewards().size(), 48u);
  EXPECT_GT(tr.last_pre_clip_norm_q(), 0.0);
  const auto loss = tr.train_batch();
  ASSERT_TRUE(loss.has_value());
  EXPECT_TRUE(std::isfinite(*loss));
}

TEST(RlTrainer, SameSeedSameRun) {
  auto run = [](std::uint64_t seed) {
    RlTrainer tr(tiny_config(), seed);
    tr.run();
    return tr.step_rewards();
  };
  EXPECT_EQ(run(10), run(10));
}

TEST(RoutingAgent, CheckpointRoundTrip) {
  RlConfig c = tiny_config();
  RlTrainer tr(c, 11);
  const auto path = std::filesystem::temp_directory_path() / "dyncomm_agent_test.ckpt";
  tr.agent().save(path, "{\"x\":1}");
  RlTrainer other(c, 12);
  EXPECT_NE(other.agent().theta_u[0].value, tr.agent().theta_u[0].value);
  EXPECT_EQ(other.agent().load(path), "{\"x\":1}");
  for (std::size_t i = 0; i < tr.agent().theta_u.size(); ++i) {
    EXPECT_EQ(other.agent().theta_u[i].value, tr.agent().theta_u[i].value);
  }
  for (std::size_t i = 0; i < tr.agent().nets.target.size(); ++i) {
    EXPECT_EQ(other.agent().nets.target[i].value, tr.agent().nets.target[i].value);
  }
  std::filesystem::remove(path);
}

TEST(RlTrainer, DecisionStates) {
  Packet p;
  p.current = 2;
  std::vector<char> inactive(4, 0);
  EXPECT_TRUE(is_decision_state(p, inactive));
  inactive[2] = 1;
  EXPECT_FALSE(is_decision_state(p, inactive));
  inactive[2] = 0;
  p.on_edge = true;
  EXPECT_FALSE(is_decision_state(p, inactive));
}

}  // namespace
}  // namespace dyncomm
