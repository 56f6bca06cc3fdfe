#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nzsim/techno_economics.hpp"

namespace nzsim {

/// Name of the intermediate sector whose output is the "electricity" fuel.
inline constexpr std::string_view kElectricity = "electricity";

struct ChoiceParams {
  double default_exponent = 3.0;
  std::map<std::string, double> exponents;  // per-sector overrides
  double cost_floor = 0.5;                  // $/unit, applied before the logit
  int convergence_year = 2100;              // calibrated weights reach their targets here

  double exponent_for(const std::string& sector) const;
  void validate() const;

  bool operator==(const ChoiceParams&) const = default;
};

struct SectorDemand {
  std::string sector;
  double base_demand = 0.0;  // units/yr in the calibration year
  double income_elasticity = 0.0;
  double price_elasticity = 0.0;

  bool operator==(const SectorDemand&) const = default;
};

struct DemandDrivers {
  double population = 1.0;
  double gdp_per_capita = 1.0;
  double price = 1.0;       // composite service price
  double efficiency = 1.0;  // demand-side efficiency multiplier
};

/// Base demand scaled by population, income and price relative to the calibration year.
double service_demand(const SectorDemand& sector, const DemandDrivers& now,
                      const DemandDrivers& base);

/// share_i = w_i c_i^-exponent / sum_j w_j c_j^-exponent
std::vector<double> logit_shares(std::span<const double> costs, std::span<const double> weights,
                                 double exponent);

/// Weights that reproduce `base_shares` at `costs`. Technologies with zero base share
/// get `future_weights` (relative to the calibrated composite cost).
std::vector<double> calibrate_share_weights(std::span<const double> costs,
                                            std::span<const double> base_shares,
                                            std::span<const double> future_weights,
                                            double exponent);

struct Vintage {
  std::string technology;
  int build_year = 0;
  double capacity = 0.0;  // units/yr
  double lifetime = 0.0;

  bool operator==(const Vintage&) const = default;
};

struct VintageStock {
  std::vector<Vintage> vintages;

  double total() const;
  double capacity_of(std::string_view technology) const;
  void add(std::string technology, int build_year, double capacity, double lifetime);

  bool operator==(const VintageStock&) const = default;
};

/// Drops vintages whose age has reached their lifetime.
VintageStock retire_and_roll(const VintageStock& stock, int year);

struct TechShareCalibration {
  double base_share = 0.0;
  /// Weight once the technology has matured. With a zero base share it applies from
  /// availability; otherwise the calibrated weight moves linearly toward it. Unset keeps
  /// the calibrated weight.
  std::optional<double> future_weight;

  bool operator==(const TechShareCalibration&) const = default;
};
/// sector -> technology -> calibration entry
using ShareCalibration = std::map<std::string, std::map<std::string, TechShareCalibration>>;

struct EnergyPrices {
  FuelPrices fuels;  // everything except electricity
  double carbon_price = 0.0;
  double storage_cost = 0.0;
};

struct DispatchInputs {
  int year = 0;
  EnergyPrices prices;
  DemandDrivers drivers;  // price field is ignored; set per sector
  /// Surviving capacity per technology index (see EnergySystem::existing_capacity);
  /// empty means no existing stock.
  std::vector<double> existing;
  double extra_electricity = 0.0;  // EJ/yr drawn by non-sector loads (DAC)
};

struct SectorOutcome {
  std::string sector;
  double demand = 0.0;
  double composite_price = 0.0;
  std::vector<std::string> technologies;
  std::vector<double> activity;
  std::vector<double> new_capacity;
  std::map<std::string, double> fuel_use;  // EJ/yr by fuel (incl. electricity)
  double gross_co2 = 0.0;                  // Gt/yr from positive emitters
  double removal = 0.0;                    // Gt/yr from negative-emission technologies
  double captured = 0.0;                   // Gt/yr sent to storage
  double water_km3 = 0.0;
};

struct DispatchResult {
  std::vector<SectorOutcome> sectors;  // end uses first, electricity last
  double electricity_price = 0.0;
  std::map<std::string, double> fuel_use;        // primary fuels, EJ/yr
  std::map<std::string, double> primary_energy;  // coal, coal_ccs, gas, gas_ccs, ...
  double gross_co2 = 0.0;
  double beccs_removal = 0.0;
  double captured_co2 = 0.0;
  double water_km3 = 0.0;

  const SectorOutcome& sector(std::string_view name) const;
};

/// Primary-energy reporting category of a technology ("coal_ccs", "renewables", ...);
/// empty for electricity-fuelled technologies.
std::string primary_category(const Technology& tech);

/// Calibrated single-nest-per-sector technology competition for one region.
class EnergySystem {
 public:
  EnergySystem(std::vector<Technology> technologies, std::vector<SectorDemand> demands,
               const ShareCalibration& calibration, const ChoiceParams& choice, int base_year,
               const FuelPrices& base_fuel_prices, const DemandDrivers& base_drivers);

  /// Fuel use implied by base shares and base demands (prices do not enter).
  static std::map<std::string, double> base_fuel_use(const std::vector<Technology>& technologies,
                                                     const std::vector<SectorDemand>& demands,
                                                     const ShareCalibration& calibration);

  double electricity_price(int year, const EnergyPrices& prices) const;
  /// Sums already-retired stocks into one capacity per technology index.
  std::vector<double> existing_capacity(const std::map<std::string, VintageStock>& stocks) const;
  std::size_t technology_index(std::string_view name) const;
  DispatchResult dispatch(const DispatchInputs& in) const;

  /// Stock that exactly serves base demand at base shares, spread evenly over past vintages.
  std::map<std::string, VintageStock> initial_stock(int step) const;

  const std::vector<Technology>& technologies() const { return technologies_; }
  const Technology& technology(std::string_view name) const;
  const DemandDrivers& base_drivers() const { return base_drivers_; }

 private:
  struct Sector {
    SectorDemand demand;
    double exponent = 3.0;
    std::vector<std::size_t> techs;
    std::vector<double> base_shares;
    std::vector<double> future_weights;
    std::vector<double> targets;  // NaN keeps the calibrated weight
    std::vector<double> weights;
    double base_price = 1.0;
  };

  struct Choice {
    std::vector<double> costs;
    std::vector<double> shares;
    double composite = 0.0;
  };

  Choice choose(const Sector& sector, int year, const FuelPrices& fuels,
                const EnergyPrices& prices) const;
  SectorOutcome run_sector(const Sector& sector, int year, double demand, const Choice& choice,
                           const std::vector<double>& existing) const;
  void accumulate(const Sector& sector, const SectorOutcome& outcome, DispatchResult& r) const;
  void calibrate(const FuelPrices& base_fuel_prices);

  std::vector<Technology> technologies_;
  std::vector<Sector> end_uses_;
  Sector power_;
  ChoiceParams choice_;
  int base_year_;
  DemandDrivers base_drivers_;
  double base_electricity_demand_ = 0.0;
};

DispatchResult dispatch_period(const EnergySystem& system, const DispatchInputs& in);

}  // namespace nzsim
