// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qoct {

struct LineMinimum {
  double x;
  double value;
  std::size_t evaluations;
};

/// Golden-section search on [lo, hi] until the bracket is shorter than tol.
LineMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Uniform scan with `coarse_points` samples, then golden section inside the
/// bracket around the best sample. Robust to the multiple shallow minima a
/// width objective develops far from the optimum.
LineMinimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t coarse_points, double tol);

struct Bounds {
  double lo;
  double hi;
};

struct CoordinateDescentOptions {
  std::vector<double> line_tolerance;  // golden-section bracket per coordinate
  std::vector<double> step_tolerance;  // converged once every step is below these
  std::size_t coarse_points = 101;
  std::size_t max_iterations = 200;
};

struct CoordinateDescentResult {
  std::vector<double> x;
  double value;
  std::size_t iterations;
  bool converged;
  bool at_bound;  // some coordinate within its line tolerance of a bound
};

/// Cyclic coordinate descent; every line search is scan_then_golden over
/// the full bound of that coordinate.
CoordinateDescentResult coordinate_descent(const std::function<double(const std::vector<double>&)>& f,
                                           std::vector<double> x0, const std::vector<Bounds>& bounds,
                                           const CoordinateDescentOptions& options);

}  // namespace qoct
