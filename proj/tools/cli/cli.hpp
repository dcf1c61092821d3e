// Copyright 2026 The tritrain Authors.
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

// Entry point shared by the tritrain executable and the tests.

#ifndef TRITRAIN_TOOLS_CLI_HPP_
#define TRITRAIN_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace tritrain::cli {

/// Runs the command line `args` (without the program name) and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tritrain::cli

#endif  // TRITRAIN_TOOLS_CLI_HPP_
