#include <cmath>

#include "doctest.h"
#include "nzsim/climate.hpp"

using namespace nzsim;

TEST_CASE("carbon pools stay empty without emissions") {
  const ClimateParams p;
  ClimateState s;
  for (int i = 0; i < 20; ++i) s = step_carbon(s, p, 0.0, 5.0);
  for (double b : s.pools) CHECK(b == 0.0);
  CHECK(s.concentration(p) == p.c0);
}

TEST_CASE("100 GtC pulse follows the closed-form impulse response") {
  const ClimateParams p;
  ClimateState s;
  for (std::size_t i = 0; i < 4; ++i) s.pools[i] = p.fractions[i] * 100.0;
  int t = 0;
  for (int check : {5, 50, 100}) {
    while (t < check) {
      s = step_carbon(s, p, 0.0, 1.0);
      ++t;
    }
    CHECK(std::abs(s.pools[0] - p.fractions[0] * 100.0) <= 1e-6 * p.fractions[0] * 100.0);
    for (std::size_t i = 1; i < 4; ++i) {
      const double exact = p.fractions[i] * 100.0 * std::exp(-t / p.timescales[i - 1]);
      CHECK(std::abs(s.pools[i] - exact) <= 1e-6 * exact);
    }
  }
}

TEST_CASE("step size does not change an emissions-free decay") {
  const ClimateParams p;
  ClimateState a, b;
  for (std::size_t i = 0; i < 4; ++i) a.pools[i] = b.pools[i] = p.fractions[i] * 100.0;
  a = step_carbon(a, p, 0.0, 50.0);
  for (int i = 0; i < 10; ++i) b = step_carbon(b, p, 0.0, 5.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.pools[i] == doctest::Approx(b.pools[i]).epsilon(1e-12));
}

TEST_CASE("non-decaying pool accumulates emissions linearly") {
  ClimateParams p;
  p.fractions = {1.0, 0.0, 0.0, 0.0};
  ClimateState s;
  std::vector<double> conc;
  for (int i = 0; i < 10; ++i) {
    s = step_carbon(s, p, 10.0, 1.0);
    conc.push_back(s.concentration(p));
  }
  for (std::size_t i = 1; i < conc.size(); ++i)
    CHECK(conc[i] - conc[i - 1] == doctest::Approx(10.0 / p.co2_per_c / p.gtc_per_ppm).epsilon(1e-12));
}

TEST_CASE("carbon mass is conserved when nothing decays") {
  ClimateParams p;
  p.timescales = {1e300, 1e300, 1e300};
  ClimateState s;
  double emitted = 0.0;
  const double flows[] = {12.0, 35.5, 3.25, 0.0, 41.0, 7.75};
  for (double f : flows) {
    s = step_carbon(s, p, f, 5.0);
    emitted += f * 5.0 / p.co2_per_c;
  }
  const double total = s.pools[0] + s.pools[1] + s.pools[2] + s.pools[3];
  CHECK(total == doctest::Approx(emitted).epsilon(1e-14));
}

TEST_CASE("fugitive methane") {
  const ClimateParams p;
  CHECK(fugitive_methane(0.0, p) == 0.0);
  CHECK(fugitive_methane(8.48, p) == doctest::Approx(0.015 * 8.48e18 / 50e6 / 1e9).epsilon(1e-14));
  CHECK(fugitive_methane(8.48, p) == doctest::Approx(2.544).epsilon(1e-12));
  ClimateParams doubled = p;
  doubled.leakage = 2.0 * p.leakage;
  CHECK(fugitive_methane(8.48, doubled) == 2.0 * fugitive_methane(8.48, p));
  CHECK_THROWS(fugitive_methane(-1.0, p));
}

TEST_CASE("methane burden relaxes to emissions times lifetime") {
  const ClimateParams p;
  ClimateState s;
  for (int i = 0; i < 40; ++i) s = step_methane(s, p, 300.0, 5.0);
  CHECK(s.ch4_burden == doctest::Approx(300.0 * p.ch4_lifetime).epsilon(1e-6));
  ClimateState one;
  one.ch4_burden = 1000.0;
  one = step_methane(one, p, 0.0, p.ch4_lifetime);
  CHECK(one.ch4_burden == doctest::Approx(1000.0 / std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("radiative forcing") {
  const ClimateParams p;
  CHECK(radiative_forcing(p.c0, 0.0, 0.0, p) == 0.0);
  CHECK(radiative_forcing(2.0 * p.c0, 0.0, 0.0, p) == doctest::Approx(p.f2x).epsilon(1e-15));
  CHECK(radiative_forcing(1.5 * p.c0, 0.0, 0.0, p) ==
        doctest::Approx(3.7 * std::log(1.5) / std::log(2.0)).epsilon(1e-14));
  CHECK(radiative_forcing(1.5 * p.c0, 0.0, 0.0, p) == doctest::Approx(2.164).epsilon(1e-3));
  CHECK(radiative_forcing(p.c0, 1000.0, 0.25, p) == doctest::Approx(1000.0 * p.ch4_efficiency + 0.25));
  CHECK_THROWS(radiative_forcing(0.0, 0.0, 0.0, p));
}

TEST_CASE("two-box temperature") {
  const ClimateParams p;
  ClimateState zero;
  zero = step_temperature(zero, p, 0.0, 5.0);
  CHECK(zero.fast == 0.0);
  CHECK(zero.slow == 0.0);

  ClimateState s;
  for (int year = 0; year < 2000; ++year) s = step_temperature(s, p, 3.7, 1.0);
  CHECK(std::abs(s.fast - 3.7 / p.feedback) <= 0.01 * 3.7 / p.feedback);

  ClimateState step;
  double previous = 0.0;
  for (int year = 0; year < 300; ++year) {
    step = step_temperature(step, p, 4.0, 1.0);
    CHECK(step.fast > step.slow);
    CHECK(step.fast >= previous);
    previous = step.fast;
  }
}

TEST_CASE("two-box update agrees with fine explicit integration") {
  const ClimateParams p;
  ClimateState exact;
  exact.fast = 0.4;
  exact.slow = 0.1;
  exact = step_temperature(exact, p, 2.5, 5.0);
  double f = 0.4, s = 0.1;
  const double h = 1e-4;
  for (int i = 0; i < 50000; ++i) {
    const double df = (2.5 - p.feedback * f - p.exchange * (f - s)) / p.fast_capacity;
    const double ds = p.exchange * (f - s) / p.slow_capacity;
    f += h * df;
    s += h * ds;
  }
  CHECK(exact.fast == doctest::Approx(f).epsilon(1e-4));
  CHECK(exact.slow == doctest::Approx(s).epsilon(1e-4));
}

TEST_CASE("same CO2, different methane: same concentration, different temperature") {
  ClimateParams p;
  p.initial_pools = {100.0, 90.0, 55.0, 8.0};
  p.initial_ch4_burden = 3000.0;
  std::vector<EmissionsPoint> a, b;
  for (int y = 2015; y <= 2100; y += 5) {
    const double co2 = 40.0 - 0.45 * (y - 2015);
    a.push_back({static_cast<double>(y), co2, 300.0, 30.0});
    b.push_back({static_cast<double>(y), co2, 320.0, 30.0});
  }
  const auto ra = run_climate(p, a, 2100);
  const auto rb = run_climate(p, b, 2100);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].concentration == rb[i].concentration);
  CHECK(rb.back().anomaly > ra.back().anomaly);
}

TEST_CASE("warming is non-decreasing under non-decreasing forcing") {
  ClimateParams p;
  ClimateState s;
  double previous = 0.0;
  for (int year = 0; year < 200; ++year) {
    s = step_temperature(s, p, 0.02 * year, 1.0);
    CHECK(s.fast + 1e-15 >= previous);
    previous = s.fast;
  }
}
