/*
 * Copyright 2026 The attrib_forge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTRIB_FORGE_CLI_HPP_
#define ATTRIB_FORGE_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace attrib_forge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitInternalError = 3;

// Entry point behind the attrib_forge binary. `args` excludes the program
// name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_CLI_HPP_
