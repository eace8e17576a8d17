// Copyright 2026 The muon-lab Authors.
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

namespace muonlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument violates a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative decomposition did not converge.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

// A computation produced NaN or infinity.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Input data (gradient, configuration value) is not finite or malformed.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Configuration parsing or validation failed. `key()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace muonlab
