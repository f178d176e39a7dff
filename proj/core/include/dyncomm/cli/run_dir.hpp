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

#ifndef DYNCOMM_CLI_RUN_DIR_HPP_
#define DYNCOMM_CLI_RUN_DIR_HPP_

#include <filesystem>
#include <string>

#include "dyncomm/cli/config.hpp"

namespace dyncomm {

// ${DYNCOMM_RUN_ROOT:-runs}/<command>-<hash>-s<seed>, created if missing.
std::filesystem::path make_run_dir(const std::string& command, const ExperimentConfig& c);

// "# config: <canonical json>" for CSV and text outputs.
std::string config_header(const ExperimentConfig& c);

// Keeps large tape buffers on the heap instead of fresh mmap pages, which
// otherwise dominate training time with page faults. No-op off glibc.
void tune_allocator();

// Writes contents to path via a temporary file and rename.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace dyncomm

#endif  // DYNCOMM_CLI_RUN_DIR_HPP_
