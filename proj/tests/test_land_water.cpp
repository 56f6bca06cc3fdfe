#include <numeric>
#include <random>

#include "doctest.h"
#include "nzsim/config.hpp"
#include "nzsim/land_water.hpp"
#include "nzsim/policy_solver.hpp"
#include "paths.hpp"

using namespace nzsim;
using nzsim::testing::scenario;

TEST_CASE("land allocation, small cases") {
  const std::vector<double> equal{7.0, 7.0}, ones{1.0, 1.0};
  const auto a = land_allocate(equal, ones, 2.0, 1000.0);
  CHECK(a[0] == doctest::Approx(500.0));
  CHECK(a[1] == doctest::Approx(500.0));

  const std::vector<double> rents{50.0, 100.0};
  const auto b = land_allocate(rents, ones, 2.0, 1000.0);
  CHECK(b[0] == doctest::Approx(1000.0 * 2500.0 / 12500.0).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(800.0).epsilon(1e-14));

  const std::vector<double> one{3.0}, w{1.0};
  CHECK(land_allocate(one, w, 2.0, 640.0)[0] == 640.0);

  const std::vector<double> negative{-1.0, 0.0};
  CHECK_THROWS(land_allocate(negative, ones, 2.0, 10.0));
  const std::vector<double> mixed{-5.0, 10.0};
  const auto c = land_allocate(mixed, ones, 2.0, 10.0);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 10.0);
}

TEST_CASE("land allocation conserves area") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> rent(1.0, 1e5);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<double> r(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = rent(rng);
      w[i] = weight(rng);
    }
    const double available = 1e7;
    const auto a = land_allocate(r, w, 0.2 + trial % 4, available);
    CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - available) <= 1e-6);
  }
}

TEST_CASE("forest rent") {
  CHECK(forest_rent(0.0, 0.7, 500.0, 10000.0) == 10000.0);
  CHECK(forest_rent(100.0, 1.0, 500.0, 10000.0) == 60000.0);
  CHECK(forest_rent(100.0, 0.5, 500.0, 10000.0) == 35000.0);
}

TEST_CASE("forest share does not fall as the carbon price rises") {
  const std::vector<double> ones{1.0, 1.0, 1.0};
  double previous = 0.0;
  for (double p = 0.0; p <= 2000.0; p += 25.0) {
    const std::vector<double> rents{30000.0, forest_rent(p, 0.6, 400.0, 8000.0), 15000.0};
    const double forest = land_allocate(rents, ones, 1.5, 1e6)[1];
    CHECK(forest >= previous);
    previous = forest;
  }
}

TEST_CASE("afforestation sink") {
  CHECK(afforestation_sink(0.0, 500.0) == 0.0);
  CHECK(afforestation_sink(10000.0, 500.0) == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(afforestation_sink(-10000.0, 500.0) == 0.0);
}

TEST_CASE("water ledger") {
  WaterActivities a;
  a.dac_removal_gt = 1.6;
  const WaterCoefficients c;
  CHECK(water_account(a, c).dac == doctest::Approx(7.52).epsilon(1e-14));
  a.dac_removal_gt = 1.0;
  CHECK(water_account(a, c).dac == doctest::Approx(4.7).epsilon(1e-14));
  CHECK(water_account(WaterActivities{}, c).total() == 0.0);

  WaterActivities full{2e6, 5e5, 1400.0, 30.0, 0.5};
  WaterCoefficients k{3e4, 1e4, 60.0, 4.7};
  const WaterLedger w = water_account(full, k);
  CHECK(w.food_irrigation == doctest::Approx(60.0));
  CHECK(w.bioenergy_irrigation == doctest::Approx(5.0));
  CHECK(w.municipal == doctest::Approx(84.0));
  CHECK(w.industrial == 30.0);
  CHECK(w.dac == doctest::Approx(2.35));
  CHECK(w.total() == w.food_irrigation + w.bioenergy_irrigation + w.municipal + w.industrial + w.dac);
}

TEST_CASE("shipped land nest conserves area and respects protection") {
  const ScenarioConfig base = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  const ScenarioConfig open = parse_scenario(scenario("sensitivity/unconstrained_land.yaml"));
  for (const char* region : {"china", "row"}) {
    const RegionModel m(base, base.region(region));
    const RegionModel u(open, open.region(region));
    for (double price : {0.0, 100.0, 400.0, 1500.0}) {
      LandPrices p;
      p.year = 2060;
      p.biomass_price = 3.0 + price / 100.0;
      p.carbon_price = price;
      p.luc_fraction = 0.5;
      const LandOutcome a = m.land().allocate(p);
      const LandOutcome b = u.land().allocate(p);
      CHECK(std::abs(std::accumulate(a.allocated.begin(), a.allocated.end(), 0.0) -
                     m.land().pool()) <= 1e-6);
      CHECK(std::abs(std::accumulate(b.allocated.begin(), b.allocated.end(), 0.0) -
                     u.land().pool()) <= 1e-6);
      CHECK(std::abs(std::accumulate(a.area.begin(), a.area.end(), 0.0) -
                     std::accumulate(b.area.begin(), b.area.end(), 0.0)) <= 1e-6);
      CHECK(b.bioenergy_area + b.forest_area >= a.bioenergy_area + a.forest_area - 1e-6);
    }
  }
}
