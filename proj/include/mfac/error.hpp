// Copyright 2026 The mfac Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <stdexcept>
#include <string>

namespace mfac {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point lies outside the declared design box.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

// Covariance or design matrix could not be factorized.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

class MissingData : public Error {
 public:
  using Error::Error;
};

class NoCandidates : public Error {
 public:
  explicit NoCandidates(int level)
      : Error("no feasible candidates for level " + std::to_string(level) +
              " after feasibility and repulsion filtering"),
        level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Broker state machine misuse, e.g. completing a task nobody claimed.
class StateViolation : public Error {
 public:
  using Error::Error;
};

// Missing or corrupt checkpoint, journal or report file.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class CampaignFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace mfac
