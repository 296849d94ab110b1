// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "qoct/spectral.hpp"

namespace qoct {

struct Layer {
  double reflectivity = 1.0;  // real amplitude reflectivity
  double opd_um = 0.0;        // single-trip optical path n_g d from the reference plane

  bool operator==(const Layer&) const = default;
};

/// Single-bounce layered reflector. Layers are sorted by strictly
/// increasing optical path and must be passive (sum r^2 <= 1).
struct SampleModel {
  std::vector<Layer> layers;
  double group_index = 1.0;

  void validate() const;
  double total_reflected_power() const;  // sum r_j^2

  bool operator==(const SampleModel&) const = default;
};

/// r(dw) = sum_j r_j exp(i 2 z_j dw / c).
ComplexSpectrum reflection_coefficient(const SampleModel& sample, const FrequencyGrid& grid);

}  // namespace qoct
