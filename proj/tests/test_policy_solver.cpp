#include <cmath>

#include "doctest.h"
#include "nzsim/config.hpp"
#include "nzsim/errors.hpp"
#include "nzsim/policy_solver.hpp"
#include "paths.hpp"

using namespace nzsim;
using nzsim::testing::scenario;

namespace {

// Commits unpriced periods up to (not including) `year`.
RegionState advance_unpriced(const RegionModel& m, int year, int step) {
  RegionState s = m.initial_state();
  for (int y = 2015; y < year; y += step) m.commit(s, m.evaluate(s, y, 0.0));
  return s;
}

}  // namespace

TEST_CASE("bisection inverts a linear MAC") {
  const SolverParams params;
  auto net = [](double p) { return 10.0 - 0.02 * p; };
  const BisectionResult r = bisect_price(net, 4.0, params, 2040);
  const double tol = std::max(params.abs_tolerance, params.rel_tolerance * 4.0);
  CHECK(std::abs(r.net - 4.0) <= tol);
  CHECK(std::abs(r.price - 300.0) <= tol / 0.02);
  CHECK_FALSE(r.slack);
  CHECK(r.iterations <= params.max_iterations);
}

TEST_CASE("bisection reports a slack cap at zero price") {
  auto net = [](double p) { return 3.0 - 0.01 * p; };
  const BisectionResult r = bisect_price(net, 3.0, SolverParams{}, 2030);
  CHECK(r.price == 0.0);
  CHECK(r.slack);
  CHECK(bisect_price(net, 5.0, SolverParams{}, 2030).price == 0.0);
}

TEST_CASE("bisection names the year of an infeasible cap") {
  auto net = [](double p) { return 10.0 - 0.001 * p; };
  try {
    bisect_price(net, 1.0, SolverParams{}, 2055);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.year() == 2055);
  }
}

TEST_CASE("storage exhaustion reads as a price that is too high") {
  auto net = [](double p) {
    if (p > 400.0) throw StorageExhaustedError(2050, "full");
    return 10.0 - 0.02 * p;
  };
  const BisectionResult r = bisect_price(net, 4.0, SolverParams{}, 2050);
  CHECK(r.price == doctest::Approx(300.0).epsilon(1e-4));
  auto always = [](double) -> double { throw StorageExhaustedError(2050, "full"); };
  CHECK_THROWS_AS(bisect_price(always, 4.0, SolverParams{}, 2050), StorageExhaustedError);
}

TEST_CASE("unpriced period: no DAC and net equals the unpriced ledger") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  const RegionModel m(c, c.region("china"));
  const RegionState s = m.initial_state();
  PeriodSnapshot snap;
  const double net = net_emissions_at_price(m, s, 2015, 0.0, &snap);
  CHECK(snap.ledger.dac == 0.0);
  CHECK(net == snap.ledger.net);
  CHECK(net == EmissionsLedger::net_of(snap.ledger.gross, snap.ledger.luc, snap.ledger.beccs,
                                       snap.ledger.dac, snap.ledger.afforestation));
}

TEST_CASE("net emissions fall as the carbon price rises on the shipped calibration") {
  for (const char* file : {"netzero2060_lowdac.yaml", "netzero2060_nodac.yaml"}) {
    const ScenarioConfig c = parse_scenario(scenario(file));
    for (const char* region : {"china", "row"}) {
      const RegionModel m(c, c.region(region));
      const RegionState s = advance_unpriced(m, 2040, c.grid.step);
      double previous = std::numeric_limits<double>::infinity();
      for (double p = 0.0; p <= 2000.0; p += 100.0) {
        const double net = net_emissions_at_price(m, s, 2040, p);
        CHECK_MESSAGE(net <= previous + 1e-6, file << " " << region << " at " << p);
        previous = net;
      }
    }
  }
}

TEST_CASE("fuel markets clear before the round limit across prices") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  for (const char* region : {"china", "row"}) {
    const RegionModel m(c, c.region(region));
    for (int year : {2040, 2060}) {
      const RegionState s = advance_unpriced(m, year, c.grid.step);
      for (double p = 0.0; p <= 2000.0; p += 13.7) {
        PeriodSnapshot snap;
        net_emissions_at_price(m, s, year, p, &snap);
        CHECK_MESSAGE(snap.market_rounds < c.solver.market_rounds, region << " " << year << " at " << p);
      }
    }
  }
}

TEST_CASE("a high price drives net emissions below zero") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  const RegionModel m(c, c.region("china"));
  const RegionState s = advance_unpriced(m, 2060, c.grid.step);
  CHECK(net_emissions_at_price(m, s, 2060, 0.0) > 0.0);
  CHECK(net_emissions_at_price(m, s, 2060, 3000.0) < 0.0);
}

TEST_CASE("solved periods meet the cap and keep the ledger identity") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  const SystemState st = run_path(c);
  for (const auto& region : st.regions) {
    const RegionConfig& rc = c.region(region.region);
    double cumulative = rc.effective_storage().cumulative_injected;
    for (const auto& p : region.periods) {
      const EmissionsLedger& l = p.ledger;
      const double readded = l.gross + l.luc - l.beccs - l.dac - l.afforestation;
      CHECK(std::abs(l.net - readded) <= 1e-12 * std::max(1.0, std::abs(l.net)));
      CHECK(l.beccs >= 0.0);
      CHECK(l.dac >= 0.0);
      CHECK(l.afforestation >= 0.0);
      CHECK(std::isfinite(l.carbon_price));
      CHECK(l.carbon_price >= 0.0);
      if (l.capped) {
        const double tol = std::max(c.solver.abs_tolerance, c.solver.rel_tolerance * std::abs(l.cap));
        CHECK(l.net <= l.cap + tol);
        if (l.carbon_price > 0.0) CHECK(std::abs(l.net - l.cap) <= tol);
        CHECK(p.solver_iterations <= c.solver.max_iterations);
        CHECK(p.market_rounds < c.solver.market_rounds);
      }

      cumulative += c.grid.step * (l.fossil_captured + l.beccs + l.dac);
      CHECK(l.cumulative_storage == doctest::Approx(cumulative).epsilon(1e-12));
    }
  }
}

// Clean capital built at the peak price keeps operating after net zero, so the price
// falls once the cap stops tightening. Kept as a visible expected failure.
TEST_CASE("carbon price never falls after it first binds" * doctest::may_fail()) {
  for (const char* file : {"netzero2060_nodac.yaml", "netzero2060_lowdac.yaml"}) {
    const ScenarioConfig c = parse_scenario(scenario(file));
    const SystemState st = run_path(c);
    for (const auto& region : st.regions) {
      double previous = 0.0;
      for (const auto& p : region.periods) {
        if (previous > 0.0)
          CHECK_MESSAGE(p.ledger.carbon_price >= previous,
                        file << " " << region.region << " " << p.ledger.year);
        previous = p.ledger.carbon_price;
      }
    }
  }
}

TEST_CASE("no-policy run has no price and no DAC") {
  const ScenarioConfig c = parse_scenario(scenario("no_policy.yaml"));
  const SystemState st = run_path(c);
  for (const auto& l : st.ledger()) {
    CHECK(l.carbon_price == 0.0);
    CHECK(l.dac == 0.0);
    CHECK_FALSE(l.capped);
  }
}

TEST_CASE("run_path is deterministic") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_highdac.yaml"));
  const auto a = run_path(c).ledger();
  const auto b = run_path(c).ledger();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].net == b[i].net);
    CHECK(a[i].carbon_price == b[i].carbon_price);
    CHECK(a[i].dac == b[i].dac);
  }
}
