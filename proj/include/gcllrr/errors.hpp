// Copyright 2026 The GCL-LRR Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace gcllrr {

/// Invalid argument or configuration value.
class parameter_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data; the message names the file and line.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate an operation contract (shape mismatch, asymmetry, ...).
class contract_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerically degenerate input (zero rows, zero spectrum).
class degenerate_input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure; the message carries the path.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value encountered during iterative optimization.
/// `epoch` is the failing iteration, or -1 when not applicable.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what, long failing_epoch = -1)
      : std::runtime_error(what), epoch(failing_epoch) {}
  long epoch;
};

}  // namespace gcllrr
