// Copyright 2026 The Dualrail Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace dualrail {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its mathematical domain (e.g. pump >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs are too short / too few for the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Inputs that must agree in length or sample rate do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is invalid or inconsistent with the sample grid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A temporal index or slot is out of range for the given record.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Required data is missing or degenerate (e.g. zero shot-noise variance).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualrail
