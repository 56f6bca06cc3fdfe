#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nzsim/climate.hpp"
#include "nzsim/energy_system.hpp"
#include "nzsim/land_water.hpp"
#include "nzsim/series.hpp"
#include "nzsim/techno_economics.hpp"

namespace nzsim {

struct TimeGrid {
  int start_year = 2015;
  int end_year = 2100;
  int step = 5;

  std::vector<int> years() const;
  bool contains(int year) const;
  void validate() const;

  bool operator==(const TimeGrid&) const = default;
};

/// Net-CO2 ceiling (GtCO2/yr) by model year.
struct CapPath {
  std::map<int, double> ceiling;

  bool binds(int year) const { return ceiling.count(year) != 0; }
  double at(int year) const;
  /// Throws ConfigError unless the path is non-increasing, hits 0 and stays there.
  void check_net_zero(int net_zero_year) const;

  bool operator==(const CapPath&) const = default;
};

struct PolicyLinkage {
  int start_year = 2025;
  double start_fraction = 0.0;
  int full_fraction_year = 2100;

  void validate() const;
  bool operator==(const PolicyLinkage&) const = default;
};

/// How a region's cap is built. `base_emissions` unset means "anchor on the unpriced run".
struct CapSpec {
  enum class Kind { none, nt2nz };
  Kind kind = Kind::none;
  int base_year = 2021;
  int net_zero_year = 2060;
  std::optional<double> base_emissions;
  std::map<int, double> values;  // explicit ceiling; must still satisfy the net-zero rule

  bool operator==(const CapSpec&) const = default;
};

/// Price of a traded fuel: price x (1+trend)^(t-base) x (use / base use)^elasticity.
struct FuelMarket {
  double price = 0.0;  // $/GJ in the base year
  double elasticity = 0.0;
  double trend = 0.0;  // per year

  bool operator==(const FuelMarket&) const = default;
};

struct Socioeconomics {
  YearSeries population;         // millions
  YearSeries gdp_per_capita;     // thousand 2015$ per person
  YearSeries demand_efficiency;  // multiplier on service demand
  YearSeries municipal_water;    // m3/person/yr

  bool operator==(const Socioeconomics&) const = default;
};

struct RegionConfig {
  std::string name;
  CapSpec cap;
  std::map<std::string, FuelMarket> fuels;
  std::vector<SectorDemand> demands;
  ShareCalibration shares;
  StorageSupplyCurve storage;
  double storage_cost_multiplier = 1.0;
  double storage_capacity_multiplier = 1.0;
  LandConfig land;
  Socioeconomics socio;
  YearSeries luc_emissions;          // GtCO2/yr not driven by the land model
  YearSeries food_irrigation_trend;  // multiplier on food irrigation intensity

  /// Storage curve after applying both multipliers.
  StorageSupplyCurve effective_storage() const;
  bool operator==(const RegionConfig&) const = default;
};

struct SolverParams {
  double price_ceiling = 5000.0;
  double abs_tolerance = 1e-4;
  double rel_tolerance = 1e-6;
  int max_iterations = 60;
  int market_rounds = 50;
  double market_tolerance = 1e-6;

  void validate() const;
  bool operator==(const SolverParams&) const = default;
};

struct DataFiles {
  std::filesystem::path technologies;
  std::filesystem::path demand;
  std::filesystem::path shares;
  std::filesystem::path storage;
  std::filesystem::path land;
  std::filesystem::path socioeconomics;

  bool operator==(const DataFiles&) const = default;
};

struct Override {
  std::string path;   // dotted key path
  std::string value;  // scalar as written

  bool operator==(const Override&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  std::string pathway = "ssp2";
  TimeGrid grid;
  DataFiles data;
  std::vector<Technology> technologies;
  DacParams dac;
  std::vector<RegionConfig> regions;
  PolicyLinkage luc_linkage;
  ClimateParams climate;
  ChoiceParams choice;
  SolverParams solver;
  std::vector<Override> overrides;

  const RegionConfig& region(const std::string& name) const;
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// cap(y) = base x (net_zero_year - y) / (net_zero_year - base_year) on grid years from base_year.
CapPath nt2nz_cap(double base_emissions, int base_year, int net_zero_year, const TimeGrid& grid);

double luc_price_fraction(const PolicyLinkage& linkage, double year);

/// Loads a scenario file, following `extends:` and applying its `overrides:` list and then
/// `extra_overrides` (applied last).
ScenarioConfig parse_scenario(const std::filesystem::path& path,
                              const std::vector<Override>& extra_overrides = {});

/// Complete YAML form of a config. Data tables are referenced by path, not inlined.
std::string serialize(const ScenarioConfig& config);
/// Parses YAML text. Relative data paths resolve against `base_dir`.
ScenarioConfig parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::string& source = "<memory>");

/// FNV-1a 64 over the serialized config (data paths reduced to file names) and data file bytes.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string hash_hex(std::uint64_t hash);

/// Dotted paths of every leaf whose value differs between two configs.
std::vector<std::string> config_diff(const ScenarioConfig& a, const ScenarioConfig& b);

/// Parses "a.b.c=value".
Override parse_override(const std::string& assignment);

}  // namespace nzsim
