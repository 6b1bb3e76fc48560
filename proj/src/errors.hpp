/*
 * Copyright 2026 The maskcount Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace maskcount {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration (maps to exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or ill-formed input data (maps to exit code 3).
class DataError : public Error {
 public:
  DataError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}
  explicit DataError(const std::string& what) : DataError(std::string(), what) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A value broke a documented invariant (negative density, shape mismatch...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf during training (maps to exit code 4).
class NumericError : public Error {
 public:
  NumericError(int epoch, int step, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + what),
        epoch_(epoch),
        step_(step) {}

  int epoch() const noexcept { return epoch_; }
  int step() const noexcept { return step_; }

 private:
  int epoch_;
  int step_;
};

#define MC_CHECK(cond, ExcType, msg) \
  do {                               \
    if (!(cond)) throw ExcType(msg); \
  } while (0)

}  // namespace maskcount
