#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nzsim/config.hpp"
#include "nzsim/energy_system.hpp"
#include "nzsim/land_water.hpp"

namespace nzsim {

/// One region-period row of the emissions account (GtCO2/yr unless noted).
struct EmissionsLedger {
  std::string region;
  int year = 0;
  double gross = 0.0;  // fossil and industrial
  double beccs = 0.0;
  double dac = 0.0;
  double afforestation = 0.0;
  double luc = 0.0;
  double net = 0.0;
  double ch4 = 0.0;  // Mt/yr from the energy system
  double carbon_price = 0.0;
  double cap = 0.0;
  bool capped = false;
  double fossil_captured = 0.0;  // includes DAC process-heat CO2
  double cumulative_storage = 0.0;  // GtCO2 at the end of the period

  /// gross + LUC - BECCS - DAC - afforestation
  static double net_of(double gross, double luc, double beccs, double dac, double afforestation) {
    return gross + luc - beccs - dac - afforestation;
  }
};

struct DacVintage {
  int build_year = 0;
  double capacity = 0.0;  // GtCO2/yr
  double gas = 0.0;       // GJ/tCO2 fixed at build
  double elec = 0.0;
  double lifetime = 40.0;

  bool operator==(const DacVintage&) const = default;
};

/// Everything one region carries from period to period.
struct RegionState {
  std::map<std::string, VintageStock> stocks;
  std::vector<DacVintage> dac;
  double cumulative_storage = 0.0;
  double forest_area = 0.0;
  FuelPrices price_hint;  // last committed market prices
};

/// Full outcome of one region in one period at one carbon price.
struct PeriodSnapshot {
  EmissionsLedger ledger;
  DispatchResult dispatch;
  LandOutcome land;
  WaterLedger water;
  FuelPrices fuel_prices;  // includes biomass and electricity
  double storage_cost = 0.0;
  double dac_cost = 0.0;          // levelized $/t of a new plant
  double dac_new_capacity = 0.0;  // Gt/yr built this period
  double dac_gas = 0.0;           // EJ/yr
  double dac_elec = 0.0;          // EJ/yr
  double dac_heat_captured = 0.0; // Gt/yr
  double storage_flow = 0.0;      // Gt/yr injected
  double luc_fraction = 0.0;
  int market_rounds = 0;
  int solver_iterations = 0;
};

/// Calibrated, immutable per-region model.
class RegionModel {
 public:
  RegionModel(const ScenarioConfig& config, const RegionConfig& region);

  const RegionConfig& region() const { return region_; }
  const EnergySystem& energy() const { return *energy_; }
  const LandModel& land() const { return *land_; }
  RegionState initial_state() const;

  /// Evaluates one period at a trial price without touching `state`.
  PeriodSnapshot evaluate(const RegionState& state, int year, double carbon_price) const;
  /// Advances `state` past a period using its chosen snapshot.
  void commit(RegionState& state, const PeriodSnapshot& snapshot) const;

  double base_biomass_price() const { return base_biomass_price_; }
  const std::map<std::string, double>& base_fuel_use() const { return base_fuel_use_; }

 private:
  FuelPrices market_prices(int year, const std::map<std::string, double>& use) const;
  double clear_biomass(const LandPrices& prices, double demand) const;

  TimeGrid grid_;
  DacParams dac_;
  PolicyLinkage linkage_;
  ClimateParams climate_;
  SolverParams solver_;
  RegionConfig region_;
  StorageSupplyCurve storage_;
  std::map<std::string, double> base_fuel_use_;
  double base_biomass_price_ = 0.0;
  DemandDrivers base_drivers_;
  std::unique_ptr<EnergySystem> energy_;
  std::unique_ptr<LandModel> land_;
};

struct BisectionResult {
  double price = 0.0;
  double net = 0.0;
  int iterations = 0;
  bool slack = false;
};

/// Finds P in [0, ceiling] with |net(P) - cap| <= max(abs_tol, rel_tol * cap).
/// `net` may throw StorageExhaustedError, which is read as "price too high".
BisectionResult bisect_price(const std::function<double(double)>& net, double cap,
                             const SolverParams& params, int year);

double net_emissions_at_price(const RegionModel& model, const RegionState& state, int year,
                              double carbon_price, PeriodSnapshot* snapshot = nullptr);

/// Solves and returns the committed snapshot for one capped period.
PeriodSnapshot solve_carbon_price(const RegionModel& model, const RegionState& state, int year,
                                  double cap, const SolverParams& params);

struct RegionPath {
  std::string region;
  CapPath cap;
  std::vector<PeriodSnapshot> periods;
};

struct SystemState {
  std::vector<RegionPath> regions;

  const RegionPath& region(const std::string& name) const;
  std::vector<EmissionsLedger> ledger() const;
};

/// Runs every region over the grid, solving capped periods in order.
SystemState run_path(const ScenarioConfig& config);

}  // namespace nzsim
