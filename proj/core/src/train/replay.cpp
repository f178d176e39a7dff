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
#include "dyncomm/train/replay.hpp"

#include <stdexcept>

namespace dyncomm {

ReplayMemory::ReplayMemory(std::size_t capacity, int seq_len)
    : capacity_(capacity), seq_len_(seq_len) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
  if (seq_len < 1) throw std::invalid_argument("sequence length must be >= 1");
}

std::size_t ReplayMemory::add_episode(std::shared_ptr<const EpisodeRecord> ep) {
  const int n = ep->length() - seq_len_ + 1;
  if (n <= 0) return 0;
  for (int s = 0; s < n; ++s) {
    windows_.push_back({ep, s});
    ++inserted_;
    if (windows_.size() > capacity_) windows_.pop_front();
  }
  return static_cast<std::size_t>(n);
}

std::vector<ReplayMemory::Window> ReplayMemory::sample(std::size_t n, Rng& rng) const {
  std::vector<Window> out;
  if (windows_.empty()) return out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(windows_[rng.uniform_int(0, static_cast<std::int64_t>(windows_.size()) - 1)]);
  }
  return out;
}

}  // namespace dyncomm
