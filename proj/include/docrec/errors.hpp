// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace docrec {

/// Base class for all docrec errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A token does not belong to the dictionary it is used with.
struct InvalidLabelError : Error {
  using Error::Error;
};

/// The target cannot be aligned to the given number of frames.
struct InfeasibleAlignmentError : Error {
  using Error::Error;
};

/// A probability lattice failed validation (row sums, value range).
struct ValidationError : Error {
  using Error::Error;
};

/// An instance is too large for an exhaustive computation.
struct SizeError : Error {
  using Error::Error;
};

/// Inconsistent or missing configuration for an operation.
struct ConfigError : Error {
  using Error::Error;
};

/// Tensor or matrix dimensions do not match the operation contract.
struct ShapeError : Error {
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. zero normalizer).
struct UndefinedMetricError : Error {
  using Error::Error;
};

/// A token sequence does not follow the layout grammar.
struct GrammarError : Error {
  using Error::Error;
};

/// An exact search exceeded its expansion budget. Carries the best
/// lower bound established before giving up.
struct BudgetExceededError : Error {
  BudgetExceededError(const std::string& what, long lower_bound)
      : Error(what), bound(lower_bound) {}
  long bound;
};

/// A font does not support a requested character.
struct FontError : Error {
  using Error::Error;
};

/// Document generation could not satisfy the style sheet constraints.
struct GenerationError : Error {
  using Error::Error;
};

}  // namespace docrec
