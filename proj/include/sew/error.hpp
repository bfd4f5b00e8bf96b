// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sew {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity was produced or consumed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A covariance or other SPD matrix is singular or ill-conditioned.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward twice on one tape.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace sew
