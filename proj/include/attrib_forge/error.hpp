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

#ifndef ATTRIB_FORGE_ERROR_HPP_
#define ATTRIB_FORGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace attrib_forge {

// Bad input data or arguments. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated binary/text file.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// A postcondition the engine itself should have guaranteed did not hold.
// The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_ERROR_HPP_
