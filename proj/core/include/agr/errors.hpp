// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace agr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes are empty, contain a zero dimension, or do not match.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class DivisionError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An object was used out of order (e.g. backward without a forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A check's precondition does not hold (e.g. a non-PSD quadratic).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Dataset files that cannot be read or parsed. The message names the
/// offending row and column.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace agr
