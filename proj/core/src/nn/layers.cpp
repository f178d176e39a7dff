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
#include "dyncomm/nn/layers.hpp"

#include <cmath>

namespace dyncomm::nn {

Matrix xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  return w;
}

Var activate(const Var& x, Activation act, double leaky_slope) {
  switch (act) {
    case Activation::kIdentity:
      return x;
    case Activation::kLeakyRelu:
      return leaky_relu(x, leaky_slope);
    case Activation::kTanh:
      return tanh(x);
    case Activation::kSigmoid:
      return sigmoid(x);
  }
  return x;
}

Mlp::Mlp(std::string prefix, std::vector<int> dims, Activation hidden, double leaky_slope)
    : prefix_(std::move(prefix)), dims_(std::move(dims)), hidden_(hidden), slope_(leaky_slope) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp '" + prefix_ + "' needs >= 2 widths");
}

void Mlp::init(ParamSet& params, Rng& rng) const {
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    const std::string base = prefix_ + "." + std::to_string(k);
    params.add(base + ".weight", xavier_uniform(dims_[k], dims_[k + 1], rng));
    params.add(base + ".bias", Matrix::Zero(1, dims_[k + 1]));
  }
}

Var Mlp::forward(const Var& x, ParamSet& params) const {
  return mlp_forward(x, params, prefix_, hidden_, slope_);
}

Var mlp_forward(const Var& x, ParamSet& layers, const std::string& prefix, Activation act,
                double leaky_slope) {
  Tape& tape = *x.tape();
  Var h = x;
  int k = 0;
  while (layers.contains(prefix + "." + std::to_string(k) + ".weight")) {
    const std::string base = prefix + "." + std::to_string(k);
    Parameter& w = layers.get(base + ".weight");
    if (h.cols() != w.value.rows()) {
      throw DimensionError("layer '" + base + "' expects input width " +
                           std::to_string(w.value.rows()) + ", got " + std::to_string(h.cols()));
    }
    if (k > 0) h = activate(h, act, leaky_slope);
    h = add_row(matmul(h, tape.param(w)), tape.param(layers.get(base + ".bias")));
    ++k;
  }
  if (k == 0) throw std::invalid_argument("no layers found under prefix '" + prefix + "'");
  return h;
}

GruCell::GruCell(std::string prefix, int input, int hidden)
    : prefix_(std::move(prefix)), input_(input), hidden_(hidden) {}

void GruCell::init(ParamSet& params, Rng& rng) const {
  params.add(prefix_ + ".w_ih", xavier_uniform(input_, 3 * hidden_, rng));
  params.add(prefix_ + ".w_hh", xavier_uniform(hidden_, 3 * hidden_, rng));
  params.add(prefix_ + ".b_ih", Matrix::Zero(1, 3 * hidden_));
  params.add(prefix_ + ".b_hh", Matrix::Zero(1, 3 * hidden_));
}

Var GruCell::step(const Var& x, const Var& h, ParamSet& params) const {
  return gru_cell_step(x, h, params, prefix_);
}

Var gru_cell_step(const Var& x, const Var& h, ParamSet& params, const std::string& prefix) {
  if (x.rows() != h.rows()) {
    throw DimensionError("gru '" + prefix + "': batch sizes differ (" +
                         std::to_string(x.rows()) + " vs " + std::to_string(h.rows()) + ")");
  }
  Parameter& w_ih = params.get(prefix + ".w_ih");
  Parameter& w_hh = params.get(prefix + ".w_hh");
  if (x.cols() != w_ih.value.rows()) {
    throw DimensionError("gru '" + prefix + "' expects input width " +
                         std::to_string(w_ih.value.rows()) + ", got " + std::to_string(x.cols()));
  }
  if (h.cols() != w_hh.value.rows()) {
    throw DimensionError("gru '" + prefix + "' expects hidden width " +
                         std::to_string(w_hh.value.rows()) + ", got " + std::to_string(h.cols()));
  }
  if (!x.value().allFinite() || !h.value().allFinite()) {
    throw NumericError("gru '" + prefix + "': non-finite input");
  }
  Tape& tape = *x.tape();
  Var gx = add_row(matmul(x, tape.param(w_ih)), tape.param(params.get(prefix + ".b_ih")));
  Var gh = add_row(matmul(h, tape.param(w_hh)), tape.param(params.get(prefix + ".b_hh")));
  return gru_combine(gx, gh, h);
}

}  // namespace dyncomm::nn
