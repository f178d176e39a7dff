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
#ifndef DYNCOMM_TRAIN_SPR_TRAINER_HPP_
#define DYNCOMM_TRAIN_SPR_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dyncomm/model/node_model.hpp"
#include "dyncomm/nn/optim.hpp"
#include "dyncomm/spr/dataset.hpp"

namespace dyncomm {

// Node model plus a linear readout psi_v -> L shortest-path predictions.
// Both live in one parameter set ("readout.0.*" for the head).
class SprModel {
 public:
  SprModel(const NodeModelConfig& node_cfg, int L, int D);

  void init(Rng& rng);
  // Runs seq_len node-state updates on the static observations of every
  // sample and returns the readout of the final step (rows b * L + v).
  nn::Var predict(std::span<const SprSample* const> batch, int seq_len, Mode mode,
                  std::span<const std::uint64_t> seeds, nn::Tape& tape);

  NodeModel model;
  nn::ParamSet params;
  int L;
  int D;

 private:
  nn::Mlp readout_;
};

struct SprTrainConfig {
  int seq_len = 8;
  int batch = 32;
  int iterations = 10000;
  int validate_every = 1000;
  int val_batch = 100;
  nn::AdamWConfig adamw;
  double clip = 1.0;  // <= 0 disables
  // Stop as soon as a validation point reaches spike_factor x the median of
  // the earlier points.
  bool stop_on_spike = false;
  double spike_factor = 5.0;
};

struct SprCurvePoint {
  int iteration = 0;
  double train_loss = 0.0;  // mean over the iterations since the last point
  double val_mse = 0.0;
  double grad_norm = 0.0;   // max pre-clip norm since the last point
};

struct SprTrainResult {
  std::vector<SprCurvePoint> curve;
  int spike_iteration = -1;  // first spiking validation point, -1 if none
};

// Median of xs (average of the middle pair for even sizes).
double median(std::vector<double> xs);
// Index of the first point >= factor x median(points before it), or -1.
int find_spike(std::span<const double> values, double factor);

// Mean squared error over every label entry of the samples.
double spr_mse(SprModel& m, std::span<const SprSample> samples, int seq_len, int batch);

SprTrainResult train_spr(SprModel& m, const SprDataset& ds, const SprTrainConfig& cfg,
                         std::uint64_t seed,
                         const std::function<void(const SprCurvePoint&)>& on_point = {});

}  // namespace dyncomm

#endif  // DYNCOMM_TRAIN_SPR_TRAINER_HPP_
