/*
   Copyright 2026 The hyperwalk Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace hyperwalk {

enum class ErrorKind {
  DegenerateEnergy,
  InvalidBound,
  InvalidArgument,
  LossOfPositivity,
  SizeLimit,
  RefinementLimit,
  DenominatorNearZero,
  InvalidBeta,
  HypothesisViolated,
  MarginViolated,
  InsufficientSignal,
  InvalidConfig,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateEnergy: return "DegenerateEnergy";
    case ErrorKind::InvalidBound: return "InvalidBound";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::LossOfPositivity: return "LossOfPositivity";
    case ErrorKind::SizeLimit: return "SizeLimit";
    case ErrorKind::RefinementLimit: return "RefinementLimit";
    case ErrorKind::DenominatorNearZero: return "DenominatorNearZero";
    case ErrorKind::InvalidBeta: return "InvalidBeta";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::MarginViolated: return "MarginViolated";
    case ErrorKind::InsufficientSignal: return "InsufficientSignal";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so the CLI can map it
// onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyperwalk
