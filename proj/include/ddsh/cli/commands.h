// Copyright 2026 The DDSH Authors.
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

#ifndef DDSH_CLI_COMMANDS_H_
#define DDSH_CLI_COMMANDS_H_

#include <iostream>
#include <ostream>

namespace ddsh::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitCheckFailed = 4;

// Entry point for the `ddsh` tool. Regular output goes to `out`, one-line
// diagnostics to `err`.
int Run(int argc, const char* const* argv, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

// Reads DDSH_LOG (error|info|debug) and routes logging to stderr.
void ConfigureLogging();

}  // namespace ddsh::cli

#endif  // DDSH_CLI_COMMANDS_H_
