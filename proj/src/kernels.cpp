// SPDX-License-Identifier: Apache-2.0
#include "qoct/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "qoct/errors.hpp"

namespace qoct::kernels {

namespace {

inline double count_rate_at(const CountRateTerms& terms, double tau) {
  double re = 0.0;
  double im = 0.0;
  const std::size_t n = terms.fringe.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = terms.detuning[k] * tau;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    re += terms.fringe[k].real() * c - terms.fringe[k].imag() * s;
    im += terms.fringe[k].real() * s + terms.fringe[k].imag() * c;
  }
  const double cc = std::cos(terms.carrier * tau);
  const double cs = std::sin(terms.carrier * tau);
  return terms.weight * (terms.constant + 2.0 * (cc * re - cs * im));
}

inline double interp(std::span<const double> x, std::span<const double> y, double dx, double at) {
  const double u = (at - x[0]) / dx;
  auto i = static_cast<std::ptrdiff_t>(std::floor(u));
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(x.size()) - 2);
  const double frac = u - static_cast<double>(i);
  return y[i] + frac * (y[i + 1] - y[i]);
}

inline double bin_average_at(std::span<const double> x, std::span<const double> y, double dx,
                             double lo, double hi) {
  if (!(hi > lo)) return interp(x, y, dx, lo);
  const auto last = static_cast<std::ptrdiff_t>(x.size()) - 1;
  auto i = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor((lo - x[0]) / dx)), 0,
                                      last - 1);
  double a = lo;
  double ya = interp(x, y, dx, a);
  double total = 0.0;
  while (a < hi) {
    const double node = x[0] + static_cast<double>(i + 1) * dx;
    const double b = (i + 1 >= last) ? hi : std::min(hi, node);
    ++i;
    if (b <= a) continue;
    const double yb = interp(x, y, dx, b);
    total += 0.5 * (b - a) * (ya + yb);
    a = b;
    ya = yb;
  }
  return total / (hi - lo);
}

void check_bins(std::span<const double> x, std::span<const double> y, std::span<const double> lo,
                std::span<const double> hi) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("bin_average: bad sample arrays");
  if (lo.size() != hi.size()) throw ConfigError("bin_average: bin edge arrays differ in length");
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (lo[j] < x.front() || hi[j] > x.back() || hi[j] < lo[j]) {
      throw PhysicsError("bin_average: bin lies outside the sampled range");
    }
  }
}

}  // namespace

std::vector<double> count_rate_serial(const CountRateTerms& terms, std::span<const double> taus) {
  std::vector<double> out(taus.size());
  for (std::size_t m = 0; m < taus.size(); ++m) out[m] = count_rate_at(terms, taus[m]);
  return out;
}

std::vector<double> count_rate_parallel(const CountRateTerms& terms, std::span<const double> taus) {
  std::vector<double> out(taus.size());
  const auto n = static_cast<std::ptrdiff_t>(taus.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < n; ++m) out[m] = count_rate_at(terms, taus[m]);
  return out;
}

std::vector<double> count_rate(const CountRateTerms& terms, std::span<const double> taus,
                               Execution execution) {
  return execution == Execution::Serial ? count_rate_serial(terms, taus)
                                        : count_rate_parallel(terms, taus);
}

std::vector<double> bin_average_serial(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> lo, std::span<const double> hi) {
  check_bins(x, y, lo, hi);
  const double dx = x[1] - x[0];
  std::vector<double> out(lo.size());
  for (std::size_t j = 0; j < lo.size(); ++j) out[j] = bin_average_at(x, y, dx, lo[j], hi[j]);
  return out;
}

std::vector<double> bin_average_parallel(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> lo, std::span<const double> hi) {
  check_bins(x, y, lo, hi);
  const double dx = x[1] - x[0];
  std::vector<double> out(lo.size());
  const auto n = static_cast<std::ptrdiff_t>(lo.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = bin_average_at(x, y, dx, lo[j], hi[j]);
  return out;
}

}  // namespace qoct::kernels
