// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qoct/errors.hpp"
#include "qoct/interferometer.hpp"
#include "qoct/units.hpp"
#include "support/oracles.hpp"

using namespace qoct;
using qoct::testing::Gen;

namespace {

InterferometerConfig su11(double ts, double ti, double g1 = 0.1, double g2 = 0.1) {
  InterferometerConfig c;
  c.geometry = Geometry::SU11;
  c.t_signal = ts;
  c.t_idler = ti;
  c.gain_g1 = g1;
  c.gain_g2 = g2;
  return c;
}

InterferometerConfig ic(double t1, double t2, double ti, double g1 = 0.1, double g2 = 0.1) {
  InterferometerConfig c;
  c.geometry = Geometry::IC;
  c.t_signal_1 = t1;
  c.t_signal_2 = t2;
  c.t_idler = ti;
  c.gain_g1 = g1;
  c.gain_g2 = g2;
  return c;
}

FrequencyGrid source_grid(const PdcSourceSpec& s, std::size_t n = 1024) {
  const double half = units::band_halfwidth_omega(s.lambda_signal_nm, s.rect_bandwidth_nm);
  return make_source_grid(s, n, 8.0 * half / static_cast<double>(n));
}

}  // namespace

TEST_CASE("SU(1,1) visibility closed form and optimum") {
  Gen gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    const double ts = gen.uniform(0.05, 1.0);
    const double ti = gen.uniform(0.01, 1.0);
    const double g1 = gen.uniform(0.01, 0.2);
    const double g2 = gen.uniform(0.01, 0.2);
    const auto c = su11(ts, ti, g1, g2);
    const double expected = 2.0 * std::sqrt(ts * ti) * g1 * g2 / (ts * g1 * g1 + g2 * g2);
    CHECK(visibility(c) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(visibility(c) <= std::sqrt(ti) + 1e-12);
    CHECK(optimal_gain_ratio(c) == doctest::Approx(1.0 / ts));
    const auto best = with_gain_ratio(c, optimal_gain_ratio(c));
    CHECK(visibility(best) == doctest::Approx(std::sqrt(ti)).epsilon(1e-12));
    CHECK(best.total_gain_squared() == doctest::Approx(c.total_gain_squared()).epsilon(1e-12));
  }
}

TEST_CASE("induced-coherence visibility closed form and optimum") {
  Gen gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double t1 = gen.uniform(0.05, 1.0);
    const double t2 = gen.uniform(0.05, 1.0);
    const double ti = gen.uniform(0.01, 1.0);
    const auto c = ic(t1, t2, ti, gen.uniform(0.01, 0.2), gen.uniform(0.01, 0.2));
    const double g1 = c.gain_g1, g2 = c.gain_g2;
    const double expected = 2.0 * std::sqrt(t1 * t2 * ti) * g1 * g2 / (t1 * g1 * g1 + t2 * g2 * g2);
    CHECK(visibility(c) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(optimal_gain_ratio(c) == doctest::Approx(t2 / t1));
    CHECK(visibility(with_gain_ratio(c, t2 / t1)) == doctest::Approx(std::sqrt(ti)).epsilon(1e-12));
  }
}

TEST_CASE("gain sweep peaks at the optimal ratio") {
  const auto c = su11(0.25, 0.5);
  const auto ratios = log_spaced(0.1, 100.0, 301);
  CHECK(ratios.front() == doctest::Approx(0.1));
  CHECK(ratios.back() == doctest::Approx(100.0));
  const auto curve = sweep_gain_ratio(c, ratios);
  REQUIRE(curve.points.size() == ratios.size());
  CHECK(curve.argmax().gain_ratio == doctest::Approx(4.0).epsilon(0.03));
  CHECK(curve.argmax().visibility == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    CHECK(curve.points[i].visibility == doctest::Approx(visibility(with_gain_ratio(c, ratios[i]))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(log_spaced(0.0, 1.0, 5), ConfigError);
  CHECK_THROWS_AS(log_spaced(1.0, 2.0, 1), ConfigError);
  CHECK_THROWS_AS(with_gain_ratio(c, -1.0), ConfigError);
  CHECK_THROWS_AS(VisibilityCurve{}.argmax(), ConfigError);
}

TEST_CASE("interferometer validation") {
  CHECK_NOTHROW(su11(1.0, 1.0).validate());
  CHECK_THROWS_AS(su11(1.0, 1.0, 0.4).validate(), ConfigError);
  CHECK_THROWS_AS(su11(1.0, 1.0, 0.0, 0.0).validate(), ConfigError);
  CHECK_THROWS_AS(su11(0.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(su11(1.0, 1.5).validate(), ConfigError);
  auto c = su11(1.0, 1.0);
  c.t_signal_1 = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  auto d = ic(1.0, 1.0, 1.0);
  d.t_signal_2.reset();
  CHECK_THROWS_AS(d.validate(), ConfigError);
  auto e = su11(1.0, 1.0);
  e.internal_phi2 = std::nan("");
  CHECK_THROWS_AS(e.validate(), ConfigError);
  CHECK(geometry_from_string(to_string(Geometry::IC)) == Geometry::IC);
  CHECK(geometry_from_string(to_string(Geometry::SU11)) == Geometry::SU11);
  CHECK_THROWS_AS(geometry_from_string("MZ"), ConfigError);
}

TEST_CASE("spectral interferogram equals the expanded field intensity") {
  // |A f r e^{i phi} + B f|^2 + S1 |f|^2 (1 - T_i sum r^2), expanded term by term.
  Gen gen(4);
  PdcSourceSpec source;
  const auto g = source_grid(source);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = trial % 2 ? su11(gen.uniform(0.1, 1.0), gen.uniform(0.1, 1.0))
                       : ic(gen.uniform(0.1, 1.0), gen.uniform(0.1, 1.0), gen.uniform(0.1, 1.0));
    c.internal_phi2 = gen.uniform(-20000.0, 20000.0);
    c.internal_phi3 = gen.uniform(-50000.0, 50000.0);
    c.reference_delay_tau = gen.uniform(-50.0, 50.0);
    const SampleModel s{{{0.4, gen.uniform(50.0, 400.0)}, {0.5, gen.uniform(500.0, 1500.0)}}, 1.0};
    const auto w = path_weights(c);
    const auto f = jsa(source, g);
    const auto out = spectral_interferogram(c, source, s, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double dw = g[k];
      const double i = std::norm(f.values[k]);
      double rr = 0.0, cross = 0.0;
      for (const auto& a : s.layers) {
        const double ta = 2.0 * a.opd_um / units::kSpeedOfLight;
        const double phase = (g.center_idler() + dw) * c.reference_delay_tau + c.internal_phase(dw) + ta * dw;
        cross += a.reflectivity * std::cos(phase);
        for (const auto& b : s.layers) {
          const double tb = 2.0 * b.opd_um / units::kSpeedOfLight;
          rr += a.reflectivity * b.reflectivity * std::cos((ta - tb) * dw);
        }
      }
      const double lost = 1.0 - c.t_idler * s.total_reflected_power();
      const double expected =
          i * (w.first * w.first * rr + w.second * w.second + 2.0 * w.first * w.second * cross +
               w.first_signal * lost);
      CHECK(out.values[k] == doctest::Approx(expected).epsilon(1e-9).scale(1e-12));
    }
  }
}

TEST_CASE("fringe contrast of a single mirror equals the visibility formula") {
  PdcSourceSpec source;
  const auto g = source_grid(source, 4096);
  const SampleModel s{{{1.0, 800.0}}, 1.0};
  Gen gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = su11(gen.uniform(0.1, 1.0), gen.uniform(0.05, 1.0), gen.uniform(0.02, 0.3),
                        gen.uniform(0.02, 0.3));
    const auto f = jsa(source, g);
    const auto out = spectral_interferogram(c, source, s, g);
    double hi = 0.0, lo = 1e300;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::norm(f.values[k]) == 0.0) continue;
      hi = std::max(hi, out.values[k]);
      lo = std::min(lo, out.values[k]);
    }
    CHECK((hi - lo) / (hi + lo) == doctest::Approx(visibility(c)).epsilon(1e-3));
  }
}

TEST_CASE("literal two-layer mode follows its formula") {
  PdcSourceSpec source;
  const auto g = source_grid(source);
  auto c = su11(0.8, 0.6);
  c.eq2_literal_mode = true;
  c.internal_phi2 = 3000.0;
  const SampleModel s{{{0.5, 200.0}, {0.6, 700.0}}, 1.0};
  const auto f = jsa(source, g);
  const auto out = spectral_interferogram(c, source, s, g);
  const auto w = path_weights(c);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double dw = g[k];
    double fr = 0.0;
    for (const auto& l : s.layers) {
      fr += l.reflectivity * l.reflectivity * std::cos(c.internal_phase(dw) + 2.0 * l.opd_um / units::kSpeedOfLight * dw);
    }
    CHECK(out.values[k] == doctest::Approx(std::norm(f.values[k]) * w.denominator * (1.0 + visibility(c) * fr)));
  }
  const SampleModel one{{{0.5, 200.0}}, 1.0};
  CHECK_THROWS_AS(spectral_interferogram(c, source, one, g), ConfigError);
}

TEST_CASE("temporal count rate integrates the spectral interferogram") {
  PdcSourceSpec source;
  const auto g = source_grid(source, 2048);
  for (bool literal : {false, true}) {
    auto c = su11(0.7, 0.5);
    c.internal_phi2 = 1500.0;
    c.eq2_literal_mode = literal;
    const SampleModel s{{{0.5, 100.0}, {0.6, 160.0}}, 1.0};
    std::vector<double> taus;
    for (int i = -20; i <= 20; ++i) taus.push_back(-2.0 * 130.0 / units::kSpeedOfLight + 7.3 * i);
    const auto serial = temporal_count_rate(c, source, s, g, taus, kernels::Execution::Serial);
    const auto parallel = temporal_count_rate(c, source, s, g, taus, kernels::Execution::Parallel);
    CHECK(serial == parallel);
    for (std::size_t m = 0; m < taus.size(); ++m) {
      auto ct = c;
      ct.reference_delay_tau = taus[m];
      const auto spec = spectral_interferogram(ct, source, s, g);
      double sum = 0.0;
      for (double v : spec.values) sum += v;
      sum *= g.delta_omega();
      CHECK(serial[m] == doctest::Approx(sum).epsilon(1e-9));
    }
  }
}

TEST_CASE("temporal fringes repeat every idler period of delay") {
  PdcSourceSpec source;
  const auto g = source_grid(source, 2048);
  const auto c = su11(1.0, 1.0);
  const SampleModel s{{{1.0, 0.0}}, 1.0};
  const double period = 2.0 * units::kPi / g.center_idler();
  std::vector<double> taus;
  for (int i = 0; i < 400; ++i) taus.push_back(-period + period * i / 100.0);
  const auto rate = temporal_count_rate(c, source, s, g, taus);
  // Near zero delay the envelope is flat to first order; the carrier sets the period.
  for (std::size_t i = 0; i + 100 < taus.size(); ++i) {
    CHECK(rate[i + 100] == doctest::Approx(rate[i]).epsilon(2e-3));
  }
  CHECK(*std::max_element(rate.begin(), rate.end()) > 10.0 * *std::min_element(rate.begin(), rate.end()));
  CHECK_THROWS_AS(temporal_count_rate(c, source, s, g, std::vector<double>{std::nan("")}), ConfigError);
}
