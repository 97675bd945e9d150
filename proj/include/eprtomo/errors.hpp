// Copyright 2026 The eprtomo Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eprtomo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A covariance matrix or squeezer violates the uncertainty principle.
class PhysicalityError : public Error {
   public:
    using Error::Error;
};

/// An argument is outside its documented domain.
class DomainError : public Error {
   public:
    using Error::Error;
};

/// Division by a vanishing variance or similar degenerate input.
class DegenerateInputError : public Error {
   public:
    using Error::Error;
};

/// Conditioning produced no statistically significant positive weight.
class DegenerateConditioningError : public Error {
   public:
    using Error::Error;
};

/// Required measurement settings are missing from a record set.
class IncompleteDataError : public Error {
   public:
    using Error::Error;
};

/// Too few samples for the requested estimate.
class SignificanceError : public Error {
   public:
    using Error::Error;
};

/// Histograms with different binning were combined.
class BinningMismatchError : public Error {
   public:
    using Error::Error;
};

/// The truncated Fock basis does not hold enough of the state's norm.
class TruncationError : public Error {
   public:
    using Error::Error;
};

/// Invalid or unknown configuration field.
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line (or record) number.
class ParseError : public Error {
   public:
    ParseError(const std::string &what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

   private:
    std::size_t line_;
};

}  // namespace eprtomo
