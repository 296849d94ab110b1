// SPDX-License-Identifier: Apache-2.0
#include "qoct/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "qoct/errors.hpp"

namespace qoct {

LineMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(hi >= lo) || !(tol > 0.0)) throw ConfigError("golden_section needs lo <= hi and tol > 0");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t evals = 2;
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc <= fd ? LineMinimum{c, fc, evals} : LineMinimum{d, fd, evals};
}

LineMinimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t coarse_points, double tol) {
  if (coarse_points < 3) throw ConfigError("scan_then_golden needs at least 3 coarse points");
  const double pitch = (hi - lo) / static_cast<double>(coarse_points - 1);
  std::size_t best = 0;
  double best_value = f(lo);
  for (std::size_t i = 1; i < coarse_points; ++i) {
    const double v = f(lo + static_cast<double>(i) * pitch);
    if (v < best_value) {
      best = i;
      best_value = v;
    }
  }
  const double x_best = lo + static_cast<double>(best) * pitch;
  const double a = std::max(lo, x_best - pitch);
  const double b = std::min(hi, x_best + pitch);
  auto refined = golden_section(f, a, b, tol);
  refined.evaluations += coarse_points;
  if (best_value < refined.value) return {x_best, best_value, refined.evaluations};
  return refined;
}

CoordinateDescentResult coordinate_descent(const std::function<double(const std::vector<double>&)>& f,
                                           std::vector<double> x0, const std::vector<Bounds>& bounds,
                                           const CoordinateDescentOptions& options) {
  const std::size_t dim = x0.size();
  if (bounds.size() != dim || options.line_tolerance.size() != dim ||
      options.step_tolerance.size() != dim) {
    throw ConfigError("coordinate_descent: dimension mismatch");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(bounds[i].hi > bounds[i].lo)) throw ConfigError("coordinate_descent: empty bound");
    x0[i] = std::clamp(x0[i], bounds[i].lo, bounds[i].hi);
  }
  CoordinateDescentResult result{x0, f(x0), 0, false, false};
  while (result.iterations < options.max_iterations) {
    ++result.iterations;
    bool small_steps = true;
    for (std::size_t i = 0; i < dim; ++i) {
      auto line = [&](double v) {
        auto trial = result.x;
        trial[i] = v;
        return f(trial);
      };
      const auto m = scan_then_golden(line, bounds[i].lo, bounds[i].hi, options.coarse_points,
                                      options.line_tolerance[i]);
      if (m.value <= result.value) {
        if (std::abs(m.x - result.x[i]) >= options.step_tolerance[i]) small_steps = false;
        result.x[i] = m.x;
        result.value = m.value;
      }
    }
    if (small_steps) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const double tol = options.line_tolerance[i];
    if (result.x[i] - bounds[i].lo <= tol || bounds[i].hi - result.x[i] <= tol) result.at_bound = true;
  }
  return result;
}

}  // namespace qoct
