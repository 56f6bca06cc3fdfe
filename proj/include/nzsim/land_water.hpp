#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nzsim {

/// Land-use node names with special rent rules; anything else keeps its base rent.
inline constexpr const char* kFoodLand = "food";
inline constexpr const char* kBioenergyLand = "bioenergy";
inline constexpr const char* kForestLand = "forest";

struct LandUse {
  std::string name;
  double base_area = 0.0;    // km2
  double base_rent = 0.0;    // $/km2/yr
  double uptake = 0.0;       // tCO2/km2/yr (forest)
  double yield = 0.0;        // GJ/km2/yr (bioenergy)
  double irrigation = 0.0;   // m3/km2/yr
  bool commercial = true;    // non-commercial land is subject to protection

  bool operator==(const LandUse&) const = default;
};

struct LandConfig {
  double total_area = 0.0;  // km2
  std::vector<LandUse> uses;
  double protection_fraction = 0.9;  // of non-commercial land
  double exponent = 1.0;             // rent logit exponent
  double food_demand_elasticity = 0.1;
  double food_yield_growth = 0.0;      // per year, reduces the food area requirement
  double bioenergy_yield_growth = 0.0; // per year
  double forest_carbon_density = 0.0;  // tCO2/km2 released when forest is cleared
  double residue_supply = 0.0;         // EJ/yr at saturation
  double residue_half_price = 3.0;     // $/GJ at which half the residues are supplied

  const LandUse& use(const std::string& name) const;
  void validate() const;

  bool operator==(const LandConfig&) const = default;
};

struct WaterLedger {
  double food_irrigation = 0.0;       // km3/yr
  double bioenergy_irrigation = 0.0;
  double municipal = 0.0;
  double industrial = 0.0;            // industry + power
  double dac = 0.0;                   // DAC evaporative losses

  double total() const {
    return food_irrigation + bioenergy_irrigation + municipal + industrial + dac;
  }
};

struct WaterActivities {
  double food_area_km2 = 0.0;
  double bioenergy_area_km2 = 0.0;
  double population_millions = 0.0;
  double energy_water_km3 = 0.0;  // sum of technology activity x water coefficient
  double dac_removal_gt = 0.0;
};

struct WaterCoefficients {
  double food_irrigation = 0.0;       // m3/km2/yr
  double bioenergy_irrigation = 0.0;  // m3/km2/yr
  double municipal = 0.0;             // m3/person/yr
  double dac = 4.7;                   // m3/tCO2
};

/// area_i = available * w_i r_i^exponent / sum_j w_j r_j^exponent.
/// Uses with non-positive rent receive nothing; throws if no rent is positive.
std::vector<double> land_allocate(std::span<const double> rents, std::span<const double> weights,
                                  double exponent, double available);

double forest_rent(double carbon_price, double luc_fraction, double uptake, double base_rent);

/// GtCO2/yr removed by forest area gained since the base year (losses remove nothing).
double afforestation_sink(double forest_area_delta, double uptake);

WaterLedger water_account(const WaterActivities& activities, const WaterCoefficients& coefficients);

struct LandPrices {
  double year = 0.0;
  double biomass_price = 0.0;    // $/GJ
  double carbon_price = 0.0;     // $/tCO2
  double luc_fraction = 0.0;
  double food_requirement = 1.0; // food area needed, relative to base
};

struct LandOutcome {
  std::vector<double> area;       // km2 per use, protected land included
  std::vector<double> allocated;  // km2 per use inside the unprotected pool
  std::vector<double> rent;
  double crop_price_index = 1.0;  // food rent relative to base
  double bioenergy_area = 0.0;
  double forest_area = 0.0;
  double food_area = 0.0;
  double crop_biomass = 0.0;      // EJ/yr
  double residue_biomass = 0.0;   // EJ/yr
  double biomass_supply() const { return crop_biomass + residue_biomass; }
};

/// One region's land nest, calibrated so base rents reproduce base areas.
class LandModel {
 public:
  LandModel(LandConfig config, int base_year, double base_biomass_price);

  /// Price at which residues plus base bioenergy land supply `base_demand` EJ/yr.
  static double clearing_base_price(const LandConfig& config, double base_demand);
  double residue_supply(double biomass_price) const;
  double bioenergy_yield(double year) const;

  LandOutcome allocate(const LandPrices& prices) const;

  const LandConfig& config() const { return config_; }
  double pool() const { return pool_; }
  double base_area(const std::string& name) const { return config_.use(name).base_area; }
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<double> rents_at(const LandPrices& prices, double food_rent) const;

  LandConfig config_;
  int base_year_;
  double base_biomass_price_;
  double pool_ = 0.0;
  std::vector<double> protected_area_;
  std::vector<double> weights_;
  std::size_t food_ = 0, bio_ = 0, forest_ = 0;
};

/// Reads `region,use,base_area_km2,base_rent,uptake,yield,irrigation_m3_per_km2,commercial`.
std::map<std::string, std::vector<LandUse>> load_land_uses(const std::filesystem::path& csv);

}  // namespace nzsim
