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
#include <vector>

#include "dyncomm/nn/checkpoint.hpp"
#include "dyncomm/nn/layers.hpp"
#include "dyncomm/nn/optim.hpp"
#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"
#include "oracles.hpp"

namespace dyncomm {
namespace {

using nn::Matrix;
using nn::Var;
using testing::finite_difference_check;

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

// Reduces any output to a scalar with fixed random weights so every entry
// of the output contributes a distinct coefficient.
Var probe(const Var& out, const Matrix& w) {
  nn::Tape& t = *out.tape();
  return nn::sum(nn::mul(out, t.constant(w)));
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a = Rng::stream(7, "env");
  Rng b = Rng::stream(7, "env");
  Rng c = Rng::stream(7, "graphgen");
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(Rng, UniformIntCoversInclusiveRange) {
  Rng r(3);
  std::vector<int> hits(4, 0);
  for (int i = 0; i < 4000; ++i) {
    const auto v = r.uniform_int(0, 3);
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 3);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Tensor, MatmulAndBroadcastGradients) {
  Rng rng(1);
  nn::ParamSet ps;
  ps.add("a", random_matrix(4, 3, rng));
  ps.add("b", random_matrix(3, 5, rng));
  ps.add("row", random_matrix(1, 5, rng));
  const Matrix w = random_matrix(4, 5, rng);
  auto r = finite_difference_check(ps, [&](nn::Tape& t) {
    Var y = nn::add_row(nn::matmul(t.param(ps.get("a")), t.param(ps.get("b"))),
                        t.param(ps.get("row")));
    return probe(nn::tanh(y), w);
  });
  EXPECT_LE(r.max_rel_error, 1e-6);
  EXPECT_EQ(r.checked, 12u + 15u + 5u);
}

TEST(Tensor, SoftmaxVariantsGradients) {
  Rng rng(2);
  nn::ParamSet ps;
  ps.add("x", random_matrix(4, 4, rng, 2.0));
  Matrix mask = Matrix::Ones(4, 4);
  mask(0, 1) = 0.0;
  mask(2, 0) = mask(2, 3) = 0.0;
  const Matrix w = random_matrix(4, 4, rng);
  auto r = finite_difference_check(ps, [&](nn::Tape& t) {
    Var x = t.param(ps.get("x"));
    Var y = nn::add(nn::add(nn::softmax(x, 0), nn::softmax(x, 1)),
                    nn::masked_softmax_rows(x, mask));
    return probe(y, w);
  });
  EXPECT_LE(r.max_rel_error, 1e-6);
}

TEST(Tensor, MaskedSoftmaxZeroesMaskedEntries) {
  nn::Tape t(false);
  Matrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  Matrix mask(2, 3);
  mask << 1, 0, 1, 0, 0, 0;
  const Matrix y = nn::masked_softmax_rows(t.constant(x), mask).value();
  EXPECT_EQ(y(0, 1), 0.0);
  EXPECT_NEAR(y(0, 0) + y(0, 2), 1.0, 1e-12);
  EXPECT_NEAR(y(0, 2) / y(0, 0), std::exp(2.0), 1e-9);
  EXPECT_EQ(y.row(1).sum(), 0.0);
}

TEST(Tensor, GatherInterleaveAndBlendGradients) {
  Rng rng(3);
  nn::ParamSet ps;
  ps.add("a", random_matrix(4, 3, rng));
  ps.add("b", random_matrix(4, 3, rng));
  const std::vector<int> idx = {2, -1, 0, 2, 3};
  const std::vector<int> rows = {1, 3, -1};
  const std::vector<int> cols = {0, 2, 1};
  nn::Vector mask(4);
  mask << 1, 0, 1, 0.5;
  const Matrix w1 = random_matrix(5, 3, rng);
  const Matrix w2 = random_matrix(8, 3, rng);
  const Matrix w3 = random_matrix(3, 1, rng);
  const Matrix w4 = random_matrix(4, 3, rng);
  auto r = finite_difference_check(ps, [&](nn::Tape& t) {
    Var a = t.param(ps.get("a"));
    Var b = t.param(ps.get("b"));
    std::vector<Var> parts = {a, b};
    Var s = nn::add(probe(nn::gather_rows(a, idx), w1), probe(nn::interleave_rows(parts), w2));
    s = nn::add(s, probe(nn::gather_entries(b, rows, cols), w3));
    return nn::add(s, probe(nn::blend_rows(a, b, mask), w4));
  });
  EXPECT_LE(r.max_rel_error, 1e-6);
}

TEST(Tensor, InterleaveLayout) {
  nn::Tape t(false);
  Matrix a(2, 1), b(2, 1);
  a << 1, 2;
  b << 10, 20;
  std::vector<Var> parts = {t.constant(a), t.constant(b)};
  const Matrix y = nn::interleave_rows(parts).value();
  ASSERT_EQ(y.rows(), 4);
  EXPECT_EQ(y(0, 0), 1);
  EXPECT_EQ(y(1, 0), 10);
  EXPECT_EQ(y(2, 0), 2);
  EXPECT_EQ(y(3, 0), 20);
}

TEST(Tensor, GroupedAttentionGradient) {
  Rng rng(4);
  nn::ParamSet ps;
  ps.add("q", random_matrix(8, 4, rng));
  ps.add("k", random_matrix(8, 4, rng));
  ps.add("v", random_matrix(8, 4, rng));
  const Matrix w = random_matrix(8, 4, rng);
  auto r = finite_difference_check(ps, [&](nn::Tape& t) {
    return probe(nn::grouped_attention(t.param(ps.get("q")), t.param(ps.get("k")),
                                       t.param(ps.get("v")), 4, 2),
                 w);
  });
  EXPECT_LE(r.max_rel_error, 1e-6);
}

TEST(Tensor, GroupedAttentionDoesNotMixGroups) {
  Rng rng(5);
  nn::Tape t(false);
  Matrix q = random_matrix(6, 4, rng), k = random_matrix(6, 4, rng), v = random_matrix(6, 4, rng);
  const Matrix y = nn::grouped_attention(t.constant(q), t.constant(k), t.constant(v), 3, 2).value();
  v.bottomRows(3).setConstant(100.0);
  const Matrix y2 =
      nn::grouped_attention(t.constant(q), t.constant(k), t.constant(v), 3, 2).value();
  EXPECT_EQ((y.topRows(3) - y2.topRows(3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tensor, DimensionErrors) {
  nn::Tape t;
  Var a = t.constant(Matrix::Zero(2, 3));
  Var b = t.constant(Matrix::Zero(2, 3));
  EXPECT_THROW(nn::matmul(a, b), nn::DimensionError);
  EXPECT_THROW(nn::add(a, t.constant(Matrix::Zero(3, 2))), nn::DimensionError);
}

TEST(Tensor, BackwardAccumulatesIntoParameters) {
  nn::ParamSet ps;
  ps.add("x", Matrix::Constant(1, 1, 3.0));
  ps.zero_grad();
  nn::Tape t;
  Var x = t.param(ps.get("x"));
  t.backward(nn::sum(nn::mul(x, x)));
  EXPECT_DOUBLE_EQ(ps.get("x").grad(0, 0), 6.0);
}

TEST(Layers, XavierBounds) {
  Rng rng(6);
  const Matrix w = nn::xavier_uniform(30, 20, rng);
  const double b = std::sqrt(6.0 / 50.0);
  EXPECT_LE(w.cwiseAbs().maxCoeff(), b);
  EXPECT_GT(w.cwiseAbs().maxCoeff(), 0.8 * b);
}

TEST(Layers, MlpGradient) {
  Rng rng(7);
  nn::Mlp mlp("m", {5, 7, 3}, nn::Activation::kLeakyRelu, 0.01);
  nn::ParamSet ps;
  mlp.init(ps, rng);
  const Matrix x = random_matrix(4, 5, rng);
  const Matrix w = random_matrix(4, 3, rng);
  auto r = finite_difference_check(
      ps, [&](nn::Tape& t) { return probe(mlp.forward(t.constant(x), ps), w); });
  EXPECT_LE(r.max_rel_error, 1e-4);
  EXPECT_EQ(ps.size(), 4u);
}

TEST(Layers, GruMatchesReferenceEquations) {
  Rng rng(8);
  nn::GruCell cell("g", 3, 2);
  nn::ParamSet ps;
  cell.init(ps, rng);
  ps.get("g.b_ih").value = random_matrix(1, 6, rng);
  ps.get("g.b_hh").value = random_matrix(1, 6, rng);
  const Matrix x = random_matrix(1, 3, rng);
  const Matrix h = random_matrix(1, 2, rng);
  nn::Tape t(false);
  const Matrix out = cell.step(t.constant(x), t.constant(h), ps).value();
  // Recompute from the gate layout [r | z | n] with scalar loops.
  const Matrix gx = x * ps.get("g.w_ih").value + ps.get("g.b_ih").value;
  const Matrix gh = h * ps.get("g.w_hh").value + ps.get("g.b_hh").value;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int j = 0; j < 2; ++j) {
    const double r = sig(gx(0, j) + gh(0, j));
    const double z = sig(gx(0, 2 + j) + gh(0, 2 + j));
    const double n = std::tanh(gx(0, 4 + j) + r * gh(0, 4 + j));
    EXPECT_NEAR(out(0, j), (1 - z) * n + z * h(0, j), 1e-12);
  }
}

TEST(Layers, GruGradient) {
  Rng rng(9);
  nn::GruCell cell("g", 4, 3);
  nn::ParamSet ps;
  cell.init(ps, rng);
  ps.add("h0", random_matrix(5, 3, rng));
  const Matrix x = random_matrix(5, 4, rng);
  const Matrix w = random_matrix(5, 3, rng);
  auto r = finite_difference_check(ps, [&](nn::Tape& t) {
    Var h = cell.step(t.constant(x), t.param(ps.get("h0")), ps);
    return probe(cell.step(t.constant(x), h, ps), w);
  });
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(Optim, AdamWFirstStepMatchesClosedForm) {
  nn::ParamSet ps;
  ps.add("p", Matrix::Constant(1, 2, 0.5));
  ps.get("p").grad << 0.2, -3.0;
  nn::AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  nn::adamw_step(ps, cfg);
  // After one step m_hat = g and v_hat = g^2.
  const double e0 = 0.5 - 0.01 * 0.1 * 0.5 - 0.01 * 0.2 / (0.2 + cfg.eps);
  const double e1 = 0.5 - 0.01 * 0.1 * 0.5 + 0.01 * 3.0 / (3.0 + cfg.eps);
  EXPECT_NEAR(ps.get("p").value(0, 0), e0, 1e-15);
  EXPECT_NEAR(ps.get("p").value(0, 1), e1, 1e-15);
  EXPECT_EQ(ps.step_count, 1);
}

TEST(Optim, ClipGradNorm) {
  nn::ParamSet ps;
  ps.add("a", Matrix::Zero(1, 1));
  ps.add("b", Matrix::Zero(1, 1));
  ps.get("a").grad(0, 0) = 3.0;
  ps.get("b").grad(0, 0) = 4.0;
  EXPECT_DOUBLE_EQ(nn::clip_grad_norm(ps, 1.0), 5.0);
  EXPECT_NEAR(nn::grad_norm(ps), 1.0, 1e-12);
  EXPECT_NEAR(ps.get("a").grad(0, 0), 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(nn::clip_grad_norm(ps, 10.0), nn::grad_norm(ps));
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(10);
  nn::ParamSet a, b;
  a.add("w", random_matrix(3, 4, rng));
  a.add("v", random_matrix(1, 2, rng));
  b.add("w", Matrix::Zero(3, 4));
  b.add("v", Matrix::Zero(1, 2));
  const auto path = std::filesystem::temp_directory_path() / "dyncomm_ckpt_test.bin";
  nn::save_checkpoint(path, {{"x/", &a}}, "{\"k\":1}");
  EXPECT_EQ(nn::read_checkpoint_meta(path), "{\"k\":1}");
  EXPECT_EQ(nn::load_checkpoint(path, {{"x/", &b}}), "{\"k\":1}");
  EXPECT_EQ(a.get("w").value, b.get("w").value);
  EXPECT_EQ(a.get("v").value, b.get("v").value);
  nn::ParamSet wrong;
  wrong.add("w", Matrix::Zero(4, 3));
  EXPECT_ANY_THROW(nn::load_checkpoint(path, {{"x/", &wrong}}));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace dyncomm
