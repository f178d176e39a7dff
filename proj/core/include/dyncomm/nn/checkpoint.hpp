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
#ifndef DYNCOMM_NN_CHECKPOINT_HPP_
#define DYNCOMM_NN_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "dyncomm/nn/tensor.hpp"

namespace dyncomm::nn {

// Binary container: "DCKP", u32 version, u32 meta length, meta bytes,
// u32 entry count, then per entry {u32 name length, name, u32 rows,
// u32 cols, rows*cols little-endian doubles}. Values round-trip exactly.
struct NamedSet {
  std::string prefix;  // prepended to every parameter name, e.g. "target/"
  ParamSet* params;
};

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedSet>& sets,
                     const std::string& meta = "{}");

// Loads into existing sets; every parameter must be present with a
// matching shape. Returns the meta string.
std::string load_checkpoint(const std::filesystem::path& path, const std::vector<NamedSet>& sets);

// Reads only the meta string.
std::string read_checkpoint_meta(const std::filesystem::path& path);

}  // namespace dyncomm::nn

#endif  // DYNCOMM_NN_CHECKPOINT_HPP_
