#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nzsim {

/// Fuel (or carrier) name -> price in $/GJ.
using FuelPrices = std::map<std::string, double>;

/// One conversion technology. Quantities are per GJ of output ("unit").
struct Technology {
  std::string name;
  std::string sector;
  std::string fuel;
  double fuel_input = 0.0;        // GJ fuel per unit output
  double nonenergy_cost = 0.0;    // $/unit, 2015 USD
  double emission_factor = 0.0;   // tCO2/unit; negative for removal technologies
  double capture_fraction = 0.0;  // [0,1]
  double water = 0.0;             // m3/unit
  double lifetime = 30.0;         // years
  int available_from = 1900;
  double cost_trend = 0.0;        // fractional change of non-energy cost per year after 2015

  bool negative_emission() const { return emission_factor < 0.0; }
  bool uses_ccs() const { return capture_fraction > 0.0; }
  /// Emitted (positive) or removed (negative) CO2 per unit after capture.
  double net_emission_factor() const;
  /// CO2 sent to geologic storage per unit.
  double captured_per_unit() const;
  double nonenergy_cost_at(double year) const;
  void validate() const;

  bool operator==(const Technology&) const = default;
};

/// Direct air capture inputs; endpoint pairs are interpolated 2020 -> 2050.
struct DacParams {
  bool enabled = true;
  double gas_2020 = 8.1;          // GJ/tCO2
  double gas_2050 = 5.3;
  double elec_2020 = 1.8;         // GJ/tCO2
  double elec_2050 = 1.3;
  double nonenergy_2020 = 300.0;  // $/tCO2
  double nonenergy_2050 = 180.0;
  double water = 4.7;             // m3/tCO2
  double lifetime = 40.0;
  double capture_fraction = 1.0;  // of the process-heat combustion CO2
  double gas_emission_factor = 0.0561;  // tCO2/GJ
  double supply_slope = 0.01;     // new Gt/yr per $/t of margin over levelized cost
  int available_from = 2025;

  static DacParams low_cost();
  static DacParams high_cost();
  void validate() const;

  bool operator==(const DacParams&) const = default;
};

struct DacCoefficients {
  double gas = 0.0;
  double elec = 0.0;
  double nonenergy = 0.0;
};

DacCoefficients dac_params_at(const DacParams& dac, double year);

/// Non-energy + energy + storage cost of one tonne removed, $/tCO2.
double dac_levelized_cost(const DacParams& dac, double year, double gas_price, double elec_price,
                          double storage_cost);

struct StorageTier {
  double capacity = 0.0;  // cumulative GtCO2 upper bound of this tier
  double cost = 0.0;      // $/tCO2

  bool operator==(const StorageTier&) const = default;
};

struct StorageSupplyCurve {
  std::vector<StorageTier> tiers;
  double cumulative_injected = 0.0;

  double total_capacity() const { return tiers.empty() ? 0.0 : tiers.back().capacity; }
  void validate() const;

  bool operator==(const StorageSupplyCurve&) const = default;
};

/// Step-function lookup, left-continuous at tier boundaries.
/// Throws StorageExhaustedError when `cumulative` is beyond the last tier.
double storage_marginal_cost(const StorageSupplyCurve& curve, double cumulative);

double tech_levelized_cost(const Technology& tech, double year, const FuelPrices& fuel_prices,
                           double carbon_price, double storage_cost);

std::vector<Technology> load_technologies(const std::filesystem::path& csv);
/// Reads `region,tier,capacity_gt,cost_usd_per_t` rows.
std::map<std::string, StorageSupplyCurve> load_storage_curves(const std::filesystem::path& csv);

}  // namespace nzsim
