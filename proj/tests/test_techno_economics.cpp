#include <random>

#include "doctest.h"
#include "nzsim/errors.hpp"
#include "nzsim/techno_economics.hpp"

using namespace nzsim;

namespace {

StorageSupplyCurve two_tier() {
  StorageSupplyCurve c;
  c.tiers = {{100.0, 10.0}, {300.0, 40.0}};
  return c;
}

// Independent lookup: first tier whose capacity is not below the query.
double scan_tiers(const StorageSupplyCurve& c, double cumulative) {
  double cost = -1.0;
  for (auto it = c.tiers.rbegin(); it != c.tiers.rend(); ++it)
    if (cumulative <= it->capacity) cost = it->cost;
  return cost;
}

}  // namespace

TEST_CASE("DAC coefficient interpolation") {
  const DacParams low = DacParams::low_cost();
  CHECK(dac_params_at(low, 2020).gas == 8.1);
  CHECK(dac_params_at(low, 2035).gas == doctest::Approx(6.7).epsilon(1e-14));
  CHECK(dac_params_at(low, 2050).gas == 5.3);
  CHECK(dac_params_at(low, 2070).gas == 5.3);
  CHECK(dac_params_at(low, 2070).elec == 1.3);
  CHECK(dac_params_at(low, 2070).nonenergy == 180.0);
  CHECK_THROWS(dac_params_at(low, 2019));
}

TEST_CASE("DAC coefficients are continuous and piecewise linear") {
  const DacParams low = DacParams::low_cost();
  for (double y = 2020.0; y < 2080.0; y += 0.25) {
    const double a = dac_params_at(low, y).nonenergy;
    const double b = dac_params_at(low, y + 0.25).nonenergy;
    CHECK(std::abs(b - a) <= 120.0 / 30.0 * 0.25 + 1e-12);
  }
  const double mid = dac_params_at(low, 2030).elec;
  CHECK(mid == doctest::Approx(1.8 - 0.5 / 3.0).epsilon(1e-14));
}

TEST_CASE("high-cost DAC coefficients do not move") {
  const DacParams high = DacParams::high_cost();
  const DacCoefficients c0 = dac_params_at(high, 2020);
  for (int y = 2020; y <= 2100; y += 5) {
    const DacCoefficients c = dac_params_at(high, y);
    CHECK(c.gas == c0.gas);
    CHECK(c.elec == c0.elec);
    CHECK(c.nonenergy == c0.nonenergy);
  }
}

TEST_CASE("DAC levelized cost") {
  CHECK(dac_levelized_cost(DacParams::low_cost(), 2050, 3.0, 15.0, 10.0) ==
        doctest::Approx(180.0 + 5.3 * 3.0 + 1.3 * 15.0 + 10.0).epsilon(1e-14));
  CHECK(dac_levelized_cost(DacParams::low_cost(), 2050, 3.0, 15.0, 10.0) ==
        doctest::Approx(225.4).epsilon(1e-12));
  CHECK(dac_levelized_cost(DacParams::high_cost(), 2050, 3.0, 15.0, 10.0) ==
        doctest::Approx(361.3).epsilon(1e-12));
  CHECK(dac_levelized_cost(DacParams::low_cost(), 2050, 0.0, 0.0, 0.0) == 180.0);
  CHECK_THROWS(dac_levelized_cost(DacParams::low_cost(), 2050, -1.0, 0.0, 0.0));
}

TEST_CASE("DAC levelized cost rises with every price") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> price(0.0, 50.0);
  std::uniform_real_distribution<double> bump(0.01, 5.0);
  const DacParams dac = DacParams::low_cost();
  for (int i = 0; i < 500; ++i) {
    const double g = price(rng), e = price(rng), s = price(rng), d = bump(rng);
    const double base = dac_levelized_cost(dac, 2040, g, e, s);
    CHECK(dac_levelized_cost(dac, 2040, g + d, e, s) > base);
    CHECK(dac_levelized_cost(dac, 2040, g, e + d, s) > base);
    CHECK(dac_levelized_cost(dac, 2040, g, e, s + d) > base);
  }
}

TEST_CASE("storage step curve") {
  const StorageSupplyCurve c = two_tier();
  CHECK(storage_marginal_cost(c, 0.0) == 10.0);
  CHECK(storage_marginal_cost(c, 100.0) == 10.0);
  CHECK(storage_marginal_cost(c, 150.0) == 40.0);
  CHECK(storage_marginal_cost(c, 150.0) == scan_tiers(c, 150.0));
  CHECK(storage_marginal_cost(c, 300.0) == 40.0);
  CHECK_THROWS_AS(storage_marginal_cost(c, 301.0), StorageExhaustedError);
  CHECK_THROWS_AS(storage_marginal_cost(c, 301.0), InfeasibleError);
}

TEST_CASE("storage cost is non-decreasing and agrees with a tier scan") {
  StorageSupplyCurve c;
  c.tiers = {{50.0, 8.0}, {120.0, 15.0}, {400.0, 30.0}, {900.0, 75.0}};
  double previous = 0.0;
  for (double q = 0.0; q <= 900.0; q += 0.5) {
    const double cost = storage_marginal_cost(c, q);
    CHECK(cost >= previous);
    CHECK(cost == scan_tiers(c, q));
    previous = cost;
  }
}

TEST_CASE("storage curve validation") {
  StorageSupplyCurve c = two_tier();
  CHECK_NOTHROW(c.validate());
  c.tiers[1].cost = 5.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = two_tier();
  c.tiers[1].capacity = 90.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = two_tier();
  c.cumulative_injected = 301.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("technology levelized cost") {
  Technology t;
  t.name = "plain";
  t.nonenergy_cost = 50.0;
  CHECK(tech_levelized_cost(t, 2030, {}, 0.0, 0.0) == 50.0);

  Technology emitter = t;
  emitter.emission_factor = 0.8;
  CHECK(tech_levelized_cost(emitter, 2030, {}, 100.0, 0.0) - 50.0 == doctest::Approx(80.0));

  Technology beccs = t;
  beccs.emission_factor = -1.0;
  beccs.capture_fraction = 1.0;
  CHECK(tech_levelized_cost(beccs, 2030, {}, 100.0, 10.0) - 50.0 == doctest::Approx(-90.0));
  CHECK(beccs.net_emission_factor() == -1.0);
  CHECK(beccs.captured_per_unit() == 1.0);

  Technology fuelled = t;
  fuelled.fuel = "gas";
  fuelled.fuel_input = 2.0;
  CHECK(tech_levelized_cost(fuelled, 2030, {{"gas", 4.0}}, 0.0, 0.0) == 58.0);
  CHECK_THROWS(tech_levelized_cost(fuelled, 2030, {{"coal", 4.0}}, 0.0, 0.0));
}

TEST_CASE("CCS emitter pays for residual emissions and storage") {
  Technology t;
  t.name = "ccs";
  t.emission_factor = 0.9;
  t.capture_fraction = 0.9;
  CHECK(t.net_emission_factor() == doctest::Approx(0.09));
  CHECK(t.captured_per_unit() == doctest::Approx(0.81));
  CHECK(tech_levelized_cost(t, 2030, {}, 100.0, 20.0) == doctest::Approx(9.0 + 16.2));
}
