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
#ifndef DYNCOMM_MODEL_AGGREGATION_HPP_
#define DYNCOMM_MODEL_AGGREGATION_HPP_

#include <span>
#include <string>

#include "dyncomm/nn/tensor.hpp"

namespace dyncomm {

enum class AggregationKind { kSum, kMean, kGcn, kGat };

const char* to_string(AggregationKind k);
AggregationKind parse_aggregation(const std::string& s);  // "sum", "mean", "gcn", "gat"

// Batched aggregation over receivers. msgs[s] holds, per receiver row, the
// message that arrived in neighbor slot s (zero rows when absent) and
// present(r, s) is 1 when it arrived.

nn::Var aggregate_sum(std::span<const nn::Var> msgs);
// Divides by the number of present messages; rows with none stay zero.
nn::Var aggregate_mean(std::span<const nn::Var> msgs, const nn::Matrix& present);

// leaky((sum_s coef(r, s) * msgs[s]) W). coef carries the symmetric
// normalization 1 / sqrt(deg_r deg_j) for present slots and 0 otherwise.
nn::Var gcn_aggregate(std::span<const nn::Var> msgs, const nn::Matrix& coef, const nn::Var& w,
                      double slope);

// Dense single-graph form: leaky(D^-1/2 A D^-1/2 H W); zero-degree rows
// give zero. A has no self loops.
nn::Matrix normalized_adjacency(const nn::Matrix& a);
nn::Var gcn_layer(const nn::Var& h, const nn::Matrix& a, const nn::Var& w, double slope);

struct GatOutput {
  nn::Var messages;  // N x H
  nn::Var alpha;     // N x (1 + D); column 0 is the self coefficient
};

// e_0 = leaky(a_self . W h_i + a_nbr . W h_i), e_s = leaky(a_self . W h_i +
// a_nbr . W m_s); alpha = softmax over self and present slots;
// M = alpha_0 W h_i + sum_s alpha_s W m_s. exclude_self drops the
// alpha_0 term from the sum but keeps it in the normalization.
GatOutput gat_aggregate(const nn::Var& self, std::span<const nn::Var> msgs,
                        const nn::Matrix& present, const nn::Var& w, const nn::Var& a_self,
                        const nn::Var& a_nbr, double slope, bool exclude_self);

}  // namespace dyncomm

#endif  // DYNCOMM_MODEL_AGGREGATION_HPP_
