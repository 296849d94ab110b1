// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "qoct/spectral.hpp"

// Hot loops of the simulator. Each kernel has a serial reference and an
// OpenMP version; both evaluate every output element with the same
// instruction sequence, so their results agree bit for bit.
namespace qoct::kernels {

enum class Execution { Serial, Parallel };

/// Spectrally integrated count rate written as
///   C(tau) = weight * (constant + 2 Re[exp(i carrier tau) sum_k fringe_k exp(i detuning_k tau)]).
/// Only non-zero fringe terms need to be stored.
struct CountRateTerms {
  double weight = 1.0;
  double constant = 0.0;
  double carrier = 0.0;
  std::vector<double> detuning;
  std::vector<Complex> fringe;
};

std::vector<double> count_rate_serial(const CountRateTerms& terms, std::span<const double> taus);
std::vector<double> count_rate_parallel(const CountRateTerms& terms, std::span<const double> taus);

std::vector<double> count_rate(const CountRateTerms& terms, std::span<const double> taus,
                               Execution execution);

/// Bin-averaged value of the piecewise-linear interpolant of (x, y) over
/// each [lo_j, hi_j]. x must be uniform and increasing; bins must lie inside
/// [x.front(), x.back()].
std::vector<double> bin_average_serial(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> lo, std::span<const double> hi);
std::vector<double> bin_average_parallel(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> lo, std::span<const double> hi);

}  // namespace qoct::kernels
