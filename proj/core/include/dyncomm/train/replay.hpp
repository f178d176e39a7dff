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
#ifndef DYNCOMM_TRAIN_REPLAY_HPP_
#define DYNCOMM_TRAIN_REPLAY_HPP_

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/graph/graph.hpp"
#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm {

// State at the start of step t plus what happened during it.
struct StepRecord {
  EnvSnapshot snap;     // source of o_t, m_t and the failure mask s_t
  nn::Matrix carry;     // node state h_t (L x H)
  std::uint64_t seed = 0;  // node-update seed for step t
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<char> done;
};

// T acted steps followed by one trailing record holding only the final
// snapshot, carry and seed.
struct EpisodeRecord {
  Geo2DGraph graph;
  std::vector<StepRecord> steps;
  int length() const { return static_cast<int>(steps.size()) - 1; }
};

// Sliding windows of seq_len consecutive steps (stride 1), stored as
// references into shared episodes. FIFO eviction at capacity (counted in
// windows), uniform sampling with replacement.
class ReplayMemory {
 public:
  struct Window {
    std::shared_ptr<const EpisodeRecord> episode;
    int start = 0;
  };

  ReplayMemory(std::size_t capacity, int seq_len);

  // Returns the number of windows added: max(0, T - seq_len + 1).
  std::size_t add_episode(std::shared_ptr<const EpisodeRecord> ep);

  std::size_t size() const { return windows_.size(); }
  std::size_t capacity() const { return capacity_; }
  int seq_len() const { return seq_len_; }
  bool empty() const { return windows_.empty(); }
  const Window& at(std::size_t i) const { return windows_[i]; }
  std::vector<Window> sample(std::size_t n, Rng& rng) const;
  // Total number of windows ever inserted (monotonic insertion id).
  std::uint64_t inserted() const { return inserted_; }

 private:
  std::size_t capacity_;
  int seq_len_;
  std::deque<Window> windows_;
  std::uint64_t inserted_ = 0;
};

}  // namespace dyncomm

#endif  // DYNCOMM_TRAIN_REPLAY_HPP_
