// Copyright 2026 The polariton-sim Authors
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

namespace polsim {

/// Bad input to a public operation (out-of-range index, mismatched spaces, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown experiment, unknown or malformed configuration key. The CLI maps
/// it (like every InvalidArgument) to exit code 2.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Base class for failures of a numerical procedure on otherwise valid input.
/// The CLI maps every NumericalError to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Liouvillian null space is larger than one (e.g. a disconnected triplet sector).
class DegenerateSteadyState : public NumericalError {
 public:
  DegenerateSteadyState(const std::string& what, int null_dim)
      : NumericalError(what), null_dimension(null_dim) {}
  int null_dimension;
};

/// Adaptive step size fell below the floor.
class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Density matrix left the physical cone beyond tolerance during integration.
class PositivityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Normalized correlation requested for a state without photons.
class UndefinedCorrelation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Harmonic truncation did not converge within the allowed cap.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A sweep did not cover the range required by the requested quantity.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Ratio against a vanishing reference.
class ContrastUnbounded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace polsim
