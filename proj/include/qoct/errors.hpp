// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qoct {

/// Invalid or inconsistent input (schema, grid shape, geometry fields).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Valid input that violates a physical precondition (truncated grid,
/// negative spectrum, scan range not covered, ...).
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AnalysisFailure {
  NoMeasurableWidth,
  NoResolvablePeak,
  TooFewFringes,
  Undersampled,
  FitUnderdetermined,
  AlignmentAmbiguous,
  InvalidInput,
};

/// A pipeline could not extract the requested quantity from the data.
class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(AnalysisFailure kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  AnalysisFailure kind() const noexcept { return kind_; }

 private:
  AnalysisFailure kind_;
};

}  // namespace qoct
