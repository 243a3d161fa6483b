// Copyright 2026 The qrmlab Authors
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

#ifndef QRMLAB_ERRORS_HPP
#define QRMLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qrmlab {

// Base class, so callers can catch everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition does not hold for the arguments.
class ContractError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Kernel that should be one dimensional is not (numerically).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Kernel vector with mixed signs beyond tolerance, i.e. Pos fails.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// A perturbative-regime assumption is violated. `which` names it.
class AssumptionError : public Error {
 public:
  AssumptionError(std::string which, const std::string& detail)
      : Error(which + ": " + detail), which_(std::move(which)) {}
  const std::string& which() const { return which_; }

 private:
  std::string which_;
};

// A computed quantity disagrees with the formula it must satisfy.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qrmlab

#endif  // QRMLAB_ERRORS_HPP
