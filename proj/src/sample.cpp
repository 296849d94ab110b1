// SPDX-License-Identifier: Apache-2.0
#include "qoct/sample.hpp"

#include <cmath>
#include <string>

#include "qoct/errors.hpp"
#include "qoct/units.hpp"

namespace qoct {

void SampleModel::validate() const {
  if (layers.empty()) throw ConfigError("sample needs at least one layer");
  if (!(group_index >= 1.0)) throw ConfigError("sample group_index must be >= 1");
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const auto& l = layers[j];
    if (!(l.reflectivity >= 0.0 && l.reflectivity <= 1.0)) {
      throw ConfigError("sample.layers[" + std::to_string(j) + "].reflectivity must lie in [0, 1]");
    }
    if (!(l.opd_um >= 0.0)) {
      throw ConfigError("sample.layers[" + std::to_string(j) + "].opd_um must be >= 0");
    }
    if (j > 0 && !(l.opd_um > layers[j - 1].opd_um)) {
      throw ConfigError("sample layers must have strictly increasing opd_um");
    }
  }
  if (total_reflected_power() > 1.0 + 1e-12) {
    throw ConfigError("sample reflects more power than it receives (sum r^2 > 1)");
  }
}

double SampleModel::total_reflected_power() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.reflectivity * l.reflectivity;
  return s;
}

ComplexSpectrum reflection_coefficient(const SampleModel& sample, const FrequencyGrid& grid) {
  sample.validate();
  ComplexSpectrum r(grid);
  for (const auto& layer : sample.layers) {
    const double delay = units::single_trip_um_to_delay(layer.opd_um);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      r.values[k] += std::polar(layer.reflectivity, delay * grid[k]);
    }
  }
  return r;
}

}  // namespace qoct
