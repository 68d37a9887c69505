// Copyright 2026 The pcfa Authors
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

#ifndef PCFA_ERROR_HPP
#define PCFA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pcfa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or arguments violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file exists but its contents are malformed (bad magic, truncation...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The filesystem refused an operation.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcfa

#endif  // PCFA_ERROR_HPP
