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
#ifndef DYNCOMM_NN_LAYERS_HPP_
#define DYNCOMM_NN_LAYERS_HPP_

#include <string>
#include <vector>

#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm::nn {

// Glorot/Xavier uniform: U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

enum class Activation { kIdentity, kLeakyRelu, kTanh, kSigmoid };

Var activate(const Var& x, Activation act, double leaky_slope);

// Fully connected stack. Layer k owns "<prefix>.<k>.weight" (in x out) and
// "<prefix>.<k>.bias" (1 x out). The activation is applied between layers;
// the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, std::vector<int> dims, Activation hidden = Activation::kLeakyRelu,
      double leaky_slope = 0.01);

  void init(ParamSet& params, Rng& rng) const;
  Var forward(const Var& x, ParamSet& params) const;

  int in_width() const { return dims_.front(); }
  int out_width() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
  std::vector<int> dims_;
  Activation hidden_ = Activation::kLeakyRelu;
  double slope_ = 0.01;
};

// Runs every "<prefix>.<k>" layer found in `layers` in order.
Var mlp_forward(const Var& x, ParamSet& layers, const std::string& prefix, Activation act,
                double leaky_slope = 0.01);

// GRU cell with PyTorch gate layout [reset | update | candidate]:
//   r = sig(x Wr + h Ur + b), z = sig(x Wz + h Uz + b),
//   n = tanh(x Wn + bn + r * (h Un + bn')), h' = (1 - z) * n + z * h.
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::string prefix, int input, int hidden);

  void init(ParamSet& params, Rng& rng) const;
  Var step(const Var& x, const Var& h, ParamSet& params) const;

  int input_width() const { return input_; }
  int hidden_width() const { return hidden_; }

 private:
  std::string prefix_;
  int input_ = 0;
  int hidden_ = 0;
};

Var gru_cell_step(const Var& x, const Var& h, ParamSet& params, const std::string& prefix);

}  // namespace dyncomm::nn

#endif  // DYNCOMM_NN_LAYERS_HPP_
