#include "nzsim/land_water.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "nzsim/csv.hpp"
#include "nzsim/energy_system.hpp"
#include "nzsim/errors.hpp"

namespace nzsim {

const LandUse& LandConfig::use(const std::string& name) const {
  for (const auto& u : uses)
    if (u.name == name) return u;
  throw ConfigError("land: no use named '" + name + "'");
}

void LandConfig::validate() const {
  if (protection_fraction < 0.0 || protection_fraction > 1.0)
    throw ConfigError("land: protection_fraction outside [0,1]");
  if (!(exponent > 0.0)) throw ConfigError("land: exponent must be > 0");
  if (!(food_demand_elasticity > 0.0))
    throw ConfigError("land: food_demand_elasticity must be > 0");
  double sum = 0.0;
  for (const auto& u : uses) {
    if (u.base_area < 0.0 || u.base_rent < 0.0 || u.uptake < 0.0 || u.yield < 0.0 ||
        u.irrigation < 0.0)
      throw ConfigError("land use '" + u.name + "' has a negative coefficient");
    sum += u.base_area;
  }
  for (const char* required : {kFoodLand, kBioenergyLand, kForestLand}) {
    const LandUse& u = use(required);
    if (!u.commercial) throw ConfigError(std::string("land use '") + required + "' must be commercial");
  }
  if (!(use(kBioenergyLand).yield > 0.0)) throw ConfigError("land: bioenergy yield must be > 0");
  if (!(use(kFoodLand).base_area > 0.0)) throw ConfigError("land: food base area must be > 0");
  if (std::abs(sum - total_area) > 1e-9 * std::max(1.0, total_area))
    throw ConfigError(fmt::format("land: base areas sum to {} but total_area is {}", sum,
                                  total_area));
  if (residue_supply < 0.0 || !(residue_half_price > 0.0))
    throw ConfigError("land: residue supply must be >= 0 with a positive half price");
}

std::vector<double> land_allocate(std::span<const double> rents, std::span<const double> weights,
                                  double exponent, double available) {
  if (!(available > 0.0)) throw std::invalid_argument("land_allocate: available must be > 0");
  if (rents.size() != weights.size())
    throw std::invalid_argument("land_allocate: rents and weights differ in length");
  std::vector<double> inverse(rents.size(), 1.0);
  std::vector<double> w(weights.begin(), weights.end());
  bool any = false;
  for (std::size_t i = 0; i < rents.size(); ++i) {
    if (rents[i] > 0.0) {
      inverse[i] = 1.0 / rents[i];
      any = any || w[i] > 0.0;
    } else {
      w[i] = 0.0;
    }
  }
  if (!any) throw std::invalid_argument("land_allocate: no use has a positive rent");
  std::vector<double> areas = logit_shares(inverse, w, exponent);
  for (double& a : areas) a *= available;
  return areas;
}

double forest_rent(double carbon_price, double luc_fraction, double uptake, double base_rent) {
  return base_rent + carbon_price * luc_fraction * uptake;
}

double afforestation_sink(double forest_area_delta, double uptake) {
  return std::max(forest_area_delta, 0.0) * uptake * 1e-9;
}

WaterLedger water_account(const WaterActivities& a, const WaterCoefficients& c) {
  if (a.food_area_km2 < 0.0 || a.bioenergy_area_km2 < 0.0 || a.population_millions < 0.0 ||
      a.energy_water_km3 < 0.0 || a.dac_removal_gt < 0.0)
    throw std::domain_error("water_account: activities must be >= 0");
  WaterLedger w;
  w.food_irrigation = a.food_area_km2 * c.food_irrigation * 1e-9;
  w.bioenergy_irrigation = a.bioenergy_area_km2 * c.bioenergy_irrigation * 1e-9;
  w.municipal = a.population_millions * 1e6 * c.municipal * 1e-9;
  w.industrial = a.energy_water_km3;
  w.dac = a.dac_removal_gt * c.dac;  // Gt x m3/t = km3
  return w;
}

LandModel::LandModel(LandConfig config, int base_year, double base_biomass_price)
    : config_(std::move(config)), base_year_(base_year), base_biomass_price_(base_biomass_price) {
  config_.validate();
  food_ = index_of(kFoodLand);
  bio_ = index_of(kBioenergyLand);
  forest_ = index_of(kForestLand);
  const std::size_t n = config_.uses.size();
  protected_area_.assign(n, 0.0);
  std::vector<double> available(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const LandUse& u = config_.uses[i];
    protected_area_[i] = u.commercial ? 0.0 : config_.protection_fraction * u.base_area;
    available[i] = u.base_area - protected_area_[i];
    pool_ += available[i];
  }
  if (!(pool_ > 0.0)) throw ConfigError("land: no unprotected land");
  LandPrices base{static_cast<double>(base_year), base_biomass_price, 0.0, 0.0, 1.0};
  const std::vector<double> rents = rents_at(base, config_.uses[food_].base_rent);
  weights_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (available[i] <= 0.0) continue;
    if (!(rents[i] > 0.0))
      throw ConfigError("land use '" + config_.uses[i].name + "' has area but no base rent");
    weights_[i] = available[i] / pool_ / std::pow(rents[i], config_.exponent);
  }
}

std::size_t LandModel::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < config_.uses.size(); ++i)
    if (config_.uses[i].name == name) return i;
  throw ConfigError("land: no use named '" + name + "'");
}

double LandModel::residue_supply(double biomass_price) const {
  if (biomass_price <= 0.0) return 0.0;
  return config_.residue_supply * biomass_price / (biomass_price + config_.residue_half_price);
}

double LandModel::bioenergy_yield(double year) const {
  return config_.uses[bio_].yield *
         std::pow(1.0 + config_.bioenergy_yield_growth, std::max(0.0, year - base_year_));
}

double LandModel::clearing_base_price(const LandConfig& config, double base_demand) {
  const double crops = config.use(kBioenergyLand).base_area * config.use(kBioenergyLand).yield * 1e-9;
  const double residues = base_demand - crops;
  if (residues <= 0.0 || residues >= config.residue_supply)
    throw ConfigError(fmt::format(
        "land: base biomass demand {} EJ cannot be met by residues ({} EJ max) plus {} EJ of "
        "crops",
        base_demand, config.residue_supply, crops));
  return config.residue_half_price * residues / (config.residue_supply - residues);
}

std::vector<double> LandModel::rents_at(const LandPrices& p, double food_rent) const {
  std::vector<double> rents(config_.uses.size());
  for (std::size_t i = 0; i < rents.size(); ++i) rents[i] = config_.uses[i].base_rent;
  rents[food_] = food_rent;
  rents[bio_] = bioenergy_yield(p.year) * p.biomass_price;
  rents[forest_] = forest_rent(p.carbon_price, p.luc_fraction, config_.uses[forest_].uptake,
                               config_.uses[forest_].base_rent);
  return rents;
}

LandOutcome LandModel::allocate(const LandPrices& p) const {
  const LandUse& food = config_.uses[food_];
  const double required = food.base_area * p.food_requirement;
  const double inv_elasticity = 1.0 / config_.food_demand_elasticity;
  const double log_base = std::log(food.base_rent);

  // Food rent clears the staple market: rent = base * (required / area)^(1/elasticity).
  auto allocation = [&](double log_rent) {
    return land_allocate(rents_at(p, std::exp(log_rent)), weights_, config_.exponent, pool_);
  };
  auto residual = [&](double log_rent) {
    const double area = allocation(log_rent)[food_];
    if (area <= 0.0) return -std::numeric_limits<double>::max();
    return log_rent - log_base - inv_elasticity * (std::log(required) - std::log(area));
  };
  double lo = log_base - 30.0, hi = log_base + 30.0;
  boost::uintmax_t iterations = 200;
  auto tol = [](double a, double b) { return std::abs(a - b) < 1e-13; };
  const auto root = boost::math::tools::toms748_solve(residual, lo, hi, tol, iterations);
  const double log_rent = 0.5 * (root.first + root.second);

  LandOutcome out;
  out.allocated = allocation(log_rent);
  out.rent = rents_at(p, std::exp(log_rent));
  out.area.resize(out.allocated.size());
  for (std::size_t i = 0; i < out.area.size(); ++i)
    out.area[i] = out.allocated[i] + protected_area_[i];
  out.crop_price_index = std::exp(log_rent - log_base);
  out.food_area = out.area[food_];
  out.bioenergy_area = out.area[bio_];
  out.forest_area = out.area[forest_];
  out.crop_biomass = out.bioenergy_area * bioenergy_yield(p.year) * 1e-9;
  out.residue_biomass = residue_supply(p.biomass_price);
  return out;
}

std::map<std::string, std::vector<LandUse>> load_land_uses(const std::filesystem::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  std::map<std::string, std::vector<LandUse>> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    LandUse u;
    u.name = t.cell(r, "use");
    u.base_area = t.number(r, "base_area_km2");
    u.base_rent = t.number(r, "base_rent");
    u.uptake = t.number(r, "uptake");
    u.yield = t.number(r, "yield");
    u.irrigation = t.number(r, "irrigation_m3_per_km2");
    u.commercial = t.number(r, "commercial") != 0.0;
    out[t.cell(r, "region")].push_back(std::move(u));
  }
  return out;
}

}  // namespace nzsim
