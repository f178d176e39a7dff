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
#include "dyncomm/model/aggregation.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dyncomm {

using nn::Matrix;
using nn::Var;

const char* to_string(AggregationKind k) {
  switch (k) {
    case AggregationKind::kSum: return "sum";
    case AggregationKind::kMean: return "mean";
    case AggregationKind::kGcn: return "gcn";
    case AggregationKind::kGat: return "gat";
  }
  return "?";
}

AggregationKind parse_aggregation(const std::string& s) {
  if (s == "sum") return AggregationKind::kSum;
  if (s == "mean") return AggregationKind::kMean;
  if (s == "gcn") return AggregationKind::kGcn;
  if (s == "gat") return AggregationKind::kGat;
  throw std::invalid_argument("unknown aggregation '" + s + "' (expected sum|mean|gcn|gat)");
}

namespace {

void check_msgs(std::span<const Var> msgs) {
  if (msgs.empty()) throw nn::DimensionError("aggregation needs at least one slot");
  for (const auto& m : msgs) {
    if (m.rows() != msgs[0].rows() || m.cols() != msgs[0].cols()) {
      throw nn::DimensionError("aggregation slots differ in shape");
    }
  }
}

}  // namespace

Var aggregate_sum(std::span<const Var> msgs) {
  check_msgs(msgs);
  Var acc = msgs[0];
  for (std::size_t s = 1; s < msgs.size(); ++s) acc = nn::add(acc, msgs[s]);
  return acc;
}

Var aggregate_mean(std::span<const Var> msgs, const Matrix& present) {
  Var total = aggregate_sum(msgs);
  nn::Vector inv(present.rows());
  for (Eigen::Index r = 0; r < present.rows(); ++r) {
    const double n = present.row(r).sum();
    inv[r] = n > 0.0 ? 1.0 / n : 0.0;
  }
  return nn::scale_rows(total, inv);
}

Var gcn_aggregate(std::span<const Var> msgs, const Matrix& coef, const Var& w, double slope) {
  check_msgs(msgs);
  if (coef.cols() != static_cast<Eigen::Index>(msgs.size()) || coef.rows() != msgs[0].rows()) {
    throw nn::DimensionError("gcn coefficient matrix shape");
  }
  Var acc = nn::scale_rows(msgs[0], coef.col(0));
  for (std::size_t s = 1; s < msgs.size(); ++s) {
    acc = nn::add(acc, nn::scale_rows(msgs[s], coef.col(static_cast<Eigen::Index>(s))));
  }
  return nn::leaky_relu(nn::matmul(acc, w), slope);
}

Matrix normalized_adjacency(const Matrix& a) {
  const Eigen::VectorXd deg = a.rowwise().sum();
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0 && deg[i] > 0.0 && deg[j] > 0.0) {
        out(i, j) = a(i, j) / std::sqrt(deg[i] * deg[j]);
      }
    }
  }
  return out;
}

Var gcn_layer(const Var& h, const Matrix& a, const Var& w, double slope) {
  if (a.rows() != a.cols() || a.cols() != h.rows()) throw nn::DimensionError("gcn adjacency shape");
  Var ahat = h.tape()->constant(normalized_adjacency(a));
  return nn::leaky_relu(nn::matmul(nn::matmul(ahat, h), w), slope);
}

GatOutput gat_aggregate(const Var& self, std::span<const Var> msgs, const Matrix& present,
                        const Var& w, const Var& a_self, const Var& a_nbr, double slope,
                        bool exclude_self) {
  check_msgs(msgs);
  const auto D = static_cast<Eigen::Index>(msgs.size());
  if (present.rows() != self.rows() || present.cols() != D) {
    throw nn::DimensionError("gat presence mask shape");
  }
  Var hw = nn::matmul(self, w);
  Var s_self = nn::matmul(hw, a_self);
  std::vector<Var> logits = {nn::leaky_relu(nn::add(s_self, nn::matmul(hw, a_nbr)), slope)};
  std::vector<Var> mw;
  for (const auto& m : msgs) {
    mw.push_back(nn::matmul(m, w));
    logits.push_back(nn::leaky_relu(nn::add(s_self, nn::matmul(mw.back(), a_nbr)), slope));
  }
  Matrix mask(self.rows(), D + 1);
  mask.col(0).setOnes();
  mask.rightCols(D) = present;
  Var alpha = nn::masked_softmax_rows(nn::concat_cols(logits), mask);
  Var out = exclude_self ? Var() : nn::mul_col(nn::slice_cols(alpha, 0, 1), hw);
  for (Eigen::Index s = 0; s < D; ++s) {
    Var term = nn::mul_col(nn::slice_cols(alpha, s + 1, 1), mw[s]);
    out = out.valid() ? nn::add(out, term) : term;
  }
  return {out, alpha};
}

}  // namespace dyncomm
