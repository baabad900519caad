//
// Copyright 2026 The Regen Concentration Authors
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

#ifndef REGEN_ERROR_HPP_
#define REGEN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace regen {

// Root of every exception thrown by the library. The CLI maps all of these
// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: non-normalized laws, out-of-range parameters, missing
// required fields, bad config files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function (e.g. x < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Root finding or linear solves that did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The requested combination is outside what the library simulates
// (e.g. native split simulation for m > 1).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace regen

#endif  // REGEN_ERROR_HPP_
