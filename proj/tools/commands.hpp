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

#ifndef DYNCOMM_TOOLS_COMMANDS_HPP_
#define DYNCOMM_TOOLS_COMMANDS_HPP_

namespace dyncomm::tools {

// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
int run_cli(int argc, char** argv);

}  // namespace dyncomm::tools

#endif  // DYNCOMM_TOOLS_COMMANDS_HPP_
