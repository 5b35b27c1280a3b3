/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_ERROR_HPP_
#define ACTIF_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace actif {

// Base of every error raised by the library. The CLI maps ConfigError and
// its subclasses to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid dimensions, out-of-range knobs, unknown method tags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot support the requested operation (empty splits,
// too few subjects or rows).
class DataError : public Error {
 public:
  using Error::Error;
};

// Missing CSV column.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// Unparsable or non-finite CSV cell. Carries the 1-based file line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// NaN/Inf appeared in a forward or backward computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Singular or ill-posed linear system.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Report slices that do not belong together (fingerprint or fold mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Statistical test refused because of degenerate input.
class DegenerateDataError : public DataError {
 public:
  using DataError::DataError;
};

class TooFewSamplesError : public DataError {
 public:
  using DataError::DataError;
};

// A capability (allocation hook) is not compiled into this binary.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace actif

#endif  // ACTIF_ERROR_HPP_
