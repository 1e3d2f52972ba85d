// Copyright 2026 The mppca Authors
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

#ifndef MPPCA_TOOLS_CLI_HPP
#define MPPCA_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mppca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

/// Runs one `mppca` invocation. `args` excludes the program name.
/// Returns 0 on success without alarms, 2 when monitor raised an alarm,
/// 1 on any error (message written to `err`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mppca::cli

#endif  // MPPCA_TOOLS_CLI_HPP
