// Copyright 2026 The rankcons Authors
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

#ifndef RANKCONS_ERRORS_H_
#define RANKCONS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rankcons {

// Exit codes used by the command-line tool. Each error class maps to one.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitMissingPrerequisite = 3;
inline constexpr int kExitData = 4;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
  virtual const char* kind() const noexcept = 0;
};

// Bad configuration: invalid sizes, unknown objective names, malformed specs.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return kExitValidation; }
  const char* kind() const noexcept override { return "config"; }
};

// An input file or artifact that a command depends on does not exist yet.
class MissingPrerequisite : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return kExitMissingPrerequisite; }
  const char* kind() const noexcept override { return "missing-prerequisite"; }
};

// Malformed or inconsistent data: non-finite scores, misaligned logs.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return kExitData; }
  const char* kind() const noexcept override { return "data"; }
};

}  // namespace rankcons

#endif  // RANKCONS_ERRORS_H_
