#include "nzsim/techno_economics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nzsim/csv.hpp"
#include "nzsim/errors.hpp"

namespace nzsim {

double Technology::net_emission_factor() const {
  if (negative_emission()) return emission_factor * capture_fraction;
  return emission_factor * (1.0 - capture_fraction);
}

double Technology::captured_per_unit() const {
  return std::abs(emission_factor) * capture_fraction;
}

double Technology::nonenergy_cost_at(double year) const {
  if (cost_trend == 0.0 || year <= 2015.0) return nonenergy_cost;
  return nonenergy_cost * std::pow(1.0 + cost_trend, year - 2015.0);
}

void Technology::validate() const {
  if (name.empty()) throw ConfigError("technology with empty name");
  if (capture_fraction < 0.0 || capture_fraction > 1.0)
    throw ConfigError("technology " + name + ": capture fraction outside [0,1]");
  if (!(lifetime > 0.0)) throw ConfigError("technology " + name + ": lifetime must be > 0");
  if (fuel_input < 0.0) throw ConfigError("technology " + name + ": negative fuel input");
  if (nonenergy_cost < 0.0) throw ConfigError("technology " + name + ": negative non-energy cost");
}

DacParams DacParams::low_cost() { return DacParams{}; }

DacParams DacParams::high_cost() {
  DacParams p;
  p.gas_2050 = p.gas_2020;
  p.elec_2050 = p.elec_2020;
  p.nonenergy_2050 = p.nonenergy_2020;
  return p;
}

void DacParams::validate() const {
  const double values[] = {gas_2020, gas_2050, elec_2020, elec_2050,
                           nonenergy_2020, nonenergy_2050, water, lifetime};
  for (double v : values)
    if (!(v > 0.0)) throw ConfigError("dac: all coefficients must be > 0");
  if (capture_fraction < 0.0 || capture_fraction > 1.0)
    throw ConfigError("dac: capture_fraction outside [0,1]");
  if (supply_slope < 0.0) throw ConfigError("dac: supply_slope must be >= 0");
}

DacCoefficients dac_params_at(const DacParams& dac, double year) {
  if (year < 2020.0) throw std::domain_error(fmt::format("dac_params_at: year {} < 2020", year));
  const double w = std::min(1.0, (year - 2020.0) / 30.0);
  auto lerp = [w](double a, double b) { return w >= 1.0 ? b : a + w * (b - a); };
  return {lerp(dac.gas_2020, dac.gas_2050), lerp(dac.elec_2020, dac.elec_2050),
          lerp(dac.nonenergy_2020, dac.nonenergy_2050)};
}

double dac_levelized_cost(const DacParams& dac, double year, double gas_price, double elec_price,
                          double storage_cost) {
  if (gas_price < 0.0 || elec_price < 0.0 || storage_cost < 0.0)
    throw std::domain_error("dac_levelized_cost: prices must be >= 0");
  const DacCoefficients c = dac_params_at(dac, year);
  return c.nonenergy + c.gas * gas_price + c.elec * elec_price + storage_cost;
}

void StorageSupplyCurve::validate() const {
  if (tiers.empty()) throw ConfigError("storage curve has no tiers");
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (!(tiers[i].capacity > 0.0) || tiers[i].cost < 0.0)
      throw ConfigError("storage tier with non-positive capacity or negative cost");
    if (i > 0 && !(tiers[i].capacity > tiers[i - 1].capacity))
      throw ConfigError("storage tier capacities must be strictly increasing");
    if (i > 0 && !(tiers[i].cost > tiers[i - 1].cost))
      throw ConfigError("storage tier costs must be strictly increasing");
  }
  if (cumulative_injected > total_capacity())
    throw ConfigError("storage cumulative injection exceeds capacity");
}

double storage_marginal_cost(const StorageSupplyCurve& curve, double cumulative) {
  if (cumulative < 0.0) throw std::domain_error("storage_marginal_cost: negative cumulative");
  for (const StorageTier& tier : curve.tiers)
    if (cumulative <= tier.capacity) return tier.cost;
  throw StorageExhaustedError(0, fmt::format("geologic storage exhausted: {} Gt exceeds {} Gt",
                                             cumulative, curve.total_capacity()));
}

double tech_levelized_cost(const Technology& tech, double year, const FuelPrices& fuel_prices,
                           double carbon_price, double storage_cost) {
  double fuel_cost = 0.0;
  if (tech.fuel_input > 0.0) {
    auto it = fuel_prices.find(tech.fuel);
    if (it == fuel_prices.end())
      throw std::invalid_argument("no price for fuel '" + tech.fuel + "' used by " + tech.name);
    fuel_cost = tech.fuel_input * it->second;
  }
  return fuel_cost + tech.nonenergy_cost_at(year) + tech.net_emission_factor() * carbon_price +
         tech.captured_per_unit() * storage_cost;
}

std::vector<Technology> load_technologies(const std::filesystem::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  std::vector<Technology> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Technology tech;
    tech.name = t.cell(r, "name");
    tech.sector = t.cell(r, "sector");
    tech.fuel = t.cell(r, "fuel");
    tech.fuel_input = t.number(r, "GJ_per_unit");
    tech.nonenergy_cost = t.number(r, "nonenergy_usd");
    tech.emission_factor = t.number(r, "emission_factor");
    tech.capture_fraction = t.number(r, "capture_fraction");
    tech.water = t.number(r, "water_m3");
    tech.lifetime = t.number(r, "lifetime_yr");
    tech.available_from = static_cast<int>(t.number(r, "available_from"));
    if (t.has_column("cost_trend")) tech.cost_trend = t.number(r, "cost_trend");
    try {
      tech.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", t.source(), t.line(r), e.what()));
    }
    for (const auto& other : out)
      if (other.name == tech.name)
        throw ConfigError(fmt::format("{}:{}: duplicate technology '{}'", t.source(), t.line(r),
                                      tech.name));
    out.push_back(std::move(tech));
  }
  return out;
}

std::map<std::string, StorageSupplyCurve> load_storage_curves(const std::filesystem::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  std::map<std::string, std::vector<std::pair<int, StorageTier>>> raw;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    raw[t.cell(r, "region")].push_back(
        {static_cast<int>(t.number(r, "tier")),
         StorageTier{t.number(r, "capacity_gt"), t.number(r, "cost_usd_per_t")}});
  }
  std::map<std::string, StorageSupplyCurve> out;
  for (auto& [region, tiers] : raw) {
    std::sort(tiers.begin(), tiers.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    StorageSupplyCurve curve;
    for (const auto& [index, tier] : tiers) curve.tiers.push_back(tier);
    try {
      curve.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: region {}: {}", t.source(), region, e.what()));
    }
    out.emplace(region, std::move(curve));
  }
  return out;
}

}  // namespace nzsim
