// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qoct/errors.hpp"
#include "qoct/spectral.hpp"
#include "support/oracles.hpp"

using namespace qoct;
using qoct::testing::Gen;

namespace {

FrequencyGrid grid(std::size_t n, double dw = 1e-3) { return FrequencyGrid(n, dw, 2.26, 1.38); }

std::vector<double> intensity(const std::vector<Complex>& v) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::norm(v[k]);
  return out;
}

}  // namespace

TEST_CASE("frequency grid is uniform and zero-centred") {
  const auto g = grid(256, 2.5e-4);
  CHECK(g.size() == 256);
  CHECK(g[128] == 0.0);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    CHECK(std::abs((g[k + 1] - g[k]) - 2.5e-4) <= 1e-12 * 2.5e-4);
  }
  const TimeAxis t(g);
  CHECK(t.delta_t() == doctest::Approx(2.0 * std::numbers::pi / (256 * 2.5e-4)).epsilon(1e-12));
  CHECK(t[128] == 0.0);
}

TEST_CASE("frequency grid rejects bad shapes") {
  CHECK_THROWS_AS(grid(100), ConfigError);
  CHECK_THROWS_AS(grid(32), ConfigError);
  CHECK_THROWS_AS(grid(128, 0.0), ConfigError);
  CHECK_THROWS_AS(grid(128, -1.0), ConfigError);
}

TEST_CASE("constant spectrum transforms to a delta at zero delay") {
  const auto g = grid(512);
  const auto out = forward_fft(ComplexSpectrum(g, std::vector<Complex>(512, 1.0)));
  const double peak = std::abs(out.values[256]);
  CHECK(peak == doctest::Approx(std::sqrt(512.0)));
  CHECK(out.axis[256] == 0.0);
  for (std::size_t m = 0; m < 512; ++m) {
    if (m != 256) CHECK(std::abs(out.values[m]) < 1e-10 * peak);
  }
}

TEST_CASE("rectangular spectrum matches the direct DFT and its sinc width") {
  const std::size_t n = 256;
  const auto g = grid(n, 1e-3);
  std::vector<Complex> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::abs(g[k]) <= 0.02 ? 1.0 : 0.0;
  const auto fast = forward_fft(ComplexSpectrum(g, x));
  const auto slow = qoct::testing::direct_centered_dft(x);
  CHECK(qoct::testing::max_abs_diff(fast.values, slow) < 1e-10);

  std::vector<Complex> padded(8192);
  for (std::size_t k = 0; k < n; ++k) padded[8192 / 2 - n / 2 + k] = x[k];
  const auto fine = centered_fft(padded);
  const TimeAxis axis(8192, 2.0 * std::numbers::pi / (8192 * 1e-3));
  const double measured = fwhm(intensity(fine), axis.samples());
  // 41 unit samples: |sum| = |sin(41 dw t / 2) / sin(dw t / 2)|.
  auto dirichlet = [](double t) {
    const double h = 0.5 * 1e-3 * t;
    const double s = std::sin(41.0 * h) / std::sin(h);
    return s * s;
  };
  const double expected = qoct::testing::continuous_fwhm(
      [&](double t) { return t == 0.0 ? 41.0 * 41.0 : dirichlet(t); }, 0.0, 150.0);
  CHECK(measured == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("forward and inverse transforms round-trip") {
  Gen gen(11);
  for (std::size_t n : {64u, 256u, 4096u}) {
    const auto g = grid(n);
    const auto x = gen.complex_vector(n);
    const auto back = inverse_fft(forward_fft(ComplexSpectrum(g, x)), g);
    CHECK(qoct::testing::max_abs_diff(back.values, x) <= 1e-12 * std::sqrt(qoct::testing::norm2(x)));
  }
}

TEST_CASE("non power-of-two transform length is rejected") {
  std::vector<Complex> x(100, 1.0);
  CHECK_THROWS_AS(centered_fft(x), ConfigError);
  CHECK_THROWS_AS(centered_ifft(x), ConfigError);
}

TEST_CASE("plain DFT of any length matches the definition") {
  Gen gen(5);
  const auto x = gen.complex_vector(37);
  const auto y = dft(x);
  for (std::size_t m = 0; m < 37; ++m) {
    Complex s = 0.0;
    for (std::size_t k = 0; k < 37; ++k) s += x[k] * std::polar(1.0, -2.0 * std::numbers::pi * k * m / 37.0);
    CHECK(std::abs(y[m] - s / std::sqrt(37.0)) < 1e-12);
  }
  CHECK(qoct::testing::max_abs_diff(idft(y), x) < 1e-12);
}

TEST_CASE("property: Parseval holds for random inputs") {
  Gen gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::size_t{1} << gen.index(6, 13);
    const auto x = gen.complex_vector(n);
    const double before = qoct::testing::norm2(x);
    const double after = qoct::testing::norm2(centered_fft(x));
    CHECK(std::abs(after - before) <= 1e-10 * before);
  }
}

TEST_CASE("property: the transform is linear") {
  Gen gen(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::size_t{1} << gen.index(6, 11);
    const auto x = gen.complex_vector(n);
    const auto y = gen.complex_vector(n);
    const Complex a(gen.uniform(-2, 2), gen.uniform(-2, 2));
    const Complex b(gen.uniform(-2, 2), gen.uniform(-2, 2));
    std::vector<Complex> mix(n);
    for (std::size_t k = 0; k < n; ++k) mix[k] = a * x[k] + b * y[k];
    const auto fx = centered_fft(x);
    const auto fy = centered_fft(y);
    const auto fm = centered_fft(mix);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(fm[k] - (a * fx[k] + b * fy[k])));
    CHECK(worst < 1e-12 * std::sqrt(static_cast<double>(n)) * 10.0);
  }
}

TEST_CASE("analytic signal of a cosine is a unit phasor") {
  const std::size_t n = 1024;
  std::vector<double> x(n);
  const double w0 = 2.0 * std::numbers::pi * 37.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::cos(w0 * static_cast<double>(k));
  const auto a = hilbert_analytic(x);
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(std::abs(std::abs(a[k]) - 1.0) < 1e-9);
    CHECK(std::abs(a[k] - std::polar(1.0, w0 * static_cast<double>(k))) < 1e-9);
  }
}

TEST_CASE("analytic signal passes DC through") {
  const std::vector<double> x(128, 3.25);
  for (const auto& v : hilbert_analytic(x)) CHECK(std::abs(v - Complex(3.25, 0.0)) < 1e-12);
}

TEST_CASE("analytic phase of a chirp recovers the instantaneous frequency") {
  const std::size_t n = 4096;
  const double w0 = 0.6;
  const double a = 2e-5;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k);
    x[k] = std::cos(w0 * t + a * t * t);
  }
  const auto z = hilbert_analytic(x);
  for (std::size_t k = n / 4; k < 3 * n / 4; k += 8) {
    const double dphi = std::arg(z[k + 1] * std::conj(z[k - 1])) / 2.0;
    const double expected = w0 + 2.0 * a * static_cast<double>(k);
    CHECK(std::abs(dphi - expected) < 0.01 * expected);
  }
}

TEST_CASE("analytic signal rejects odd lengths") {
  const std::vector<double> x(65, 1.0);
  CHECK_THROWS_AS(hilbert_analytic(x), ConfigError);
}

TEST_CASE("property: analytic signal keeps the real part and is idempotent") {
  Gen gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 * gen.index(16, 700);
    const auto x = gen.real_vector(n);
    const auto z = hilbert_analytic(x);
    std::vector<double> re(n);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(z[k].real() - x[k]) < 1e-10);
      re[k] = z[k].real();
    }
    const auto again = hilbert_analytic(re);
    CHECK(qoct::testing::max_abs_diff(again, z) < 1e-10);
  }
}

TEST_CASE("fwhm of a triangle is exact") {
  std::vector<double> axis(101);
  std::vector<double> y(101);
  for (std::size_t k = 0; k < 101; ++k) {
    axis[k] = static_cast<double>(k) - 50.0;
    y[k] = std::max(0.0, 1.0 - std::abs(axis[k]) / 10.0);
  }
  CHECK(fwhm(y, axis) == 10.0);
}

TEST_CASE("fwhm of a finely sampled Gaussian") {
  std::vector<double> axis;
  std::vector<double> y;
  for (double x = -8.0; x <= 8.0; x += 0.001) {
    axis.push_back(x);
    y.push_back(std::exp(-x * x / 2.0));
  }
  CHECK(std::abs(fwhm(y, axis) - 2.0 * std::sqrt(2.0 * std::log(2.0))) < 1e-3);
}

TEST_CASE("fwhm without a unique interior maximum fails") {
  const std::vector<double> axis{0, 1, 2, 3, 4, 5, 6};
  auto kind = [&](const std::vector<double>& y) {
    try {
      fwhm(y, axis);
    } catch (const AnalysisError& e) {
      return e.kind();
    }
    return AnalysisFailure::InvalidInput;
  };
  CHECK(kind({0, 1, 0, 0, 1, 0, 0}) == AnalysisFailure::NoMeasurableWidth);
  CHECK(kind({5, 4, 3, 2, 1, 0, 0}) == AnalysisFailure::NoMeasurableWidth);
  CHECK(kind({0, 0.6, 0.8, 1, 0.8, 0.7, 0.6}) == AnalysisFailure::NoMeasurableWidth);
}

TEST_CASE("property: fwhm is invariant under vertical scaling") {
  Gen gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const double sigma = gen.uniform(0.5, 5.0);
    const double centre = gen.uniform(-3.0, 3.0);
    std::vector<double> axis;
    std::vector<double> y;
    for (double x = -25.0; x <= 25.0; x += 0.05) {
      axis.push_back(x);
      y.push_back(std::exp(-(x - centre) * (x - centre) / (2 * sigma * sigma)));
    }
    const double base = fwhm(y, axis);
    const double pow2 = std::ldexp(1.0, static_cast<int>(gen.index(0, 40)) - 20);
    std::vector<double> scaled(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) scaled[k] = pow2 * y[k];
    CHECK(fwhm(scaled, axis) == base);
    const double s = gen.log_uniform(1e-6, 1e6);
    for (std::size_t k = 0; k < y.size(); ++k) scaled[k] = s * y[k];
    CHECK(fwhm(scaled, axis) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("find_peaks locates a sinc^2 peak to half a pitch") {
  std::vector<double> axis;
  std::vector<double> y;
  for (double z = -3000.0; z <= 3000.0; z += 1.0) {
    axis.push_back(z);
    const double u = (z - 1500.3) / 12.0;
    y.push_back(u == 0.0 ? 1.0 : std::pow(std::sin(u) / u, 2));
  }
  const auto peaks = find_peaks(y, axis, 0.3, 50.0);
  REQUIRE(peaks.size() == 1);
  CHECK(std::abs(peaks[0].position - 1500.3) <= 0.5);
  REQUIRE(peaks[0].fwhm.has_value());
}

TEST_CASE("find_peaks reports mirror pairs symmetrically") {
  std::vector<double> axis;
  std::vector<double> y;
  for (int k = -2048; k <= 2048; ++k) {
    const double z = 0.75 * k;
    axis.push_back(z);
    y.push_back(std::exp(-std::pow((z - 900.0) / 20.0, 2)) + std::exp(-std::pow((z + 900.0) / 20.0, 2)));
  }
  const auto peaks = find_peaks(y, axis, 0.1, 30.0);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0].position + peaks[1].position) < 1e-9);
  CHECK(std::abs(peaks[0].height - peaks[1].height) < 1e-9);
}

TEST_CASE("find_peaks of flat input and inside the exclusion window") {
  const std::vector<double> axis{-2, -1, 0, 1, 2, 3, 4};
  CHECK(find_peaks(std::vector<double>(7, 1.0), axis, 0.0, 0.0).empty());
  const std::vector<double> bump{0, 0.5, 1, 0.5, 0, 0, 0};
  CHECK(find_peaks(bump, axis, 0.0, 0.5).empty());
  CHECK(find_peaks(bump, axis, 0.0, 0.0).size() == 1);
}
