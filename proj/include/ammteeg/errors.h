// Copyright 2026 The AM-MTEEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMMTEEG_ERRORS_H_
#define AMMTEEG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ammteeg {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent shapes, bad hyperparameters, missing or unknown config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A signal is shorter than the window that has to slide over it.
class InputTooShortError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Unreadable or malformed datasets and trial bundles.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in losses, currents or gradients.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Corrupt checkpoint files or unsupported format versions.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. running a backward pass without a saved forward input.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace ammteeg

#endif  // AMMTEEG_ERRORS_H_
