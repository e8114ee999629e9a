//
// Copyright 2026 The streamdp Authors
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
//

#ifndef STREAMDP_ERRORS_HPP
#define STREAMDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace streamdp {

// Base class for all conditions that abort an operation in this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments violating a documented precondition
// (dimension mismatch, missing parameter, non-finite value, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The requested operation is not defined for this object
// (e.g. Minkowski gauge of the probability simplex).
class Unsupported : public Error {
 public:
  using Error::Error;
};

// Parameter outside the validity range of the formula being evaluated.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// A streaming object received more inputs than its declared length.
class StreamExhausted : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a diverging iteration were detected.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// A projected covariate collapsed to (numerical) zero norm.
class DegenerateProjection : public Error {
 public:
  using Error::Error;
};

// The gauge-minimizing lift could not reach the residual tolerance.
class LiftFailure : public Error {
 public:
  LiftFailure(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}

  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace streamdp

#endif  // STREAMDP_ERRORS_HPP
