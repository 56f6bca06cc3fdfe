#include "nzsim/energy_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "nzsim/errors.hpp"

namespace nzsim {

double ChoiceParams::exponent_for(const std::string& sector) const {
  auto it = exponents.find(sector);
  return it == exponents.end() ? default_exponent : it->second;
}

void ChoiceParams::validate() const {
  auto check = [](double g, const std::string& where) {
    if (!(g > 0.0) || !std::isfinite(g))
      throw ConfigError("choice: logit exponent for " + where + " must be finite and > 0");
  };
  check(default_exponent, "default");
  for (const auto& [sector, g] : exponents) check(g, sector);
  if (!(cost_floor > 0.0)) throw ConfigError("choice: cost_floor must be > 0");
}

double service_demand(const SectorDemand& sector, const DemandDrivers& now,
                      const DemandDrivers& base) {
  if (!(now.population > 0.0 && now.gdp_per_capita > 0.0 && now.price > 0.0 &&
        base.population > 0.0 && base.gdp_per_capita > 0.0 && base.price > 0.0))
    throw std::domain_error("service_demand: drivers must be > 0");
  return sector.base_demand * (now.population / base.population) *
         std::pow(now.gdp_per_capita / base.gdp_per_capita, sector.income_elasticity) *
         std::pow(now.price / base.price, sector.price_elasticity) *
         (now.efficiency / base.efficiency);
}

std::vector<double> logit_shares(std::span<const double> costs, std::span<const double> weights,
                                 double exponent) {
  if (costs.size() != weights.size())
    throw std::invalid_argument("logit_shares: costs and weights differ in length");
  std::vector<double> log_terms(costs.size(), -std::numeric_limits<double>::infinity());
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("logit_shares: negative weight");
    if (weights[i] == 0.0) continue;
    if (!(costs[i] > 0.0))
      throw std::invalid_argument("logit_shares: non-positive cost with positive weight");
    log_terms[i] = std::log(weights[i]) - exponent * std::log(costs[i]);
    max_term = std::max(max_term, log_terms[i]);
  }
  if (!std::isfinite(max_term)) throw std::invalid_argument("logit_shares: no positive weight");
  std::vector<double> shares(costs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (weights[i] == 0.0) continue;
    shares[i] = std::exp(log_terms[i] - max_term);
    sum += shares[i];
  }
  for (double& s : shares) s /= sum;
  return shares;
}

std::vector<double> calibrate_share_weights(std::span<const double> costs,
                                            std::span<const double> base_shares,
                                            std::span<const double> future_weights,
                                            double exponent) {
  double composite = 0.0;
  double total_share = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    composite += base_shares[i] * costs[i];
    total_share += base_shares[i];
  }
  if (!(total_share > 0.0)) throw ConfigError("share calibration: no positive base share");
  composite /= total_share;
  std::vector<double> weights(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    weights[i] = base_shares[i] > 0.0
                     ? base_shares[i] / total_share * std::pow(costs[i] / composite, exponent)
                     : future_weights[i];
  }
  return weights;
}

double VintageStock::total() const {
  double sum = 0.0;
  for (const auto& v : vintages) sum += v.capacity;
  return sum;
}

double VintageStock::capacity_of(std::string_view technology) const {
  double sum = 0.0;
  for (const auto& v : vintages)
    if (v.technology == technology) sum += v.capacity;
  return sum;
}

void VintageStock::add(std::string technology, int build_year, double capacity, double lifetime) {
  if (capacity <= 0.0) return;
  vintages.push_back({std::move(technology), build_year, capacity, lifetime});
}

VintageStock retire_and_roll(const VintageStock& stock, int year) {
  VintageStock out;
  for (const auto& v : stock.vintages)
    if (static_cast<double>(year - v.build_year) < v.lifetime) out.vintages.push_back(v);
  return out;
}

const SectorOutcome& DispatchResult::sector(std::string_view name) const {
  for (const auto& s : sectors)
    if (s.sector == name) return s;
  throw std::out_of_range("no sector " + std::string(name));
}

std::string primary_category(const Technology& tech) {
  if (tech.fuel == kElectricity) return {};
  if (tech.fuel == "coal" || tech.fuel == "gas" || tech.fuel == "biomass")
    return tech.uses_ccs() ? tech.fuel + "_ccs" : tech.fuel;
  return tech.fuel;
}

namespace {

struct BaseSector {
  std::vector<std::size_t> techs;
  std::vector<double> shares;
  std::vector<double> future_weights;
  std::vector<double> targets;
};

BaseSector collect(const std::vector<Technology>& technologies, const std::string& sector,
                   const ShareCalibration& calibration) {
  BaseSector out;
  auto cal = calibration.find(sector);
  for (std::size_t i = 0; i < technologies.size(); ++i) {
    if (technologies[i].sector != sector) continue;
    out.techs.push_back(i);
    TechShareCalibration entry;
    if (cal != calibration.end()) {
      auto it = cal->second.find(technologies[i].name);
      if (it != cal->second.end()) entry = it->second;
    }
    out.shares.push_back(entry.base_share);
    out.future_weights.push_back(entry.future_weight.value_or(0.0));
    out.targets.push_back(entry.future_weight && entry.base_share > 0.0
                              ? *entry.future_weight
                              : std::numeric_limits<double>::quiet_NaN());
  }
  if (out.techs.empty()) throw ConfigError("sector '" + sector + "' has no technologies");
  const double total = std::accumulate(out.shares.begin(), out.shares.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6)
    throw ConfigError(fmt::format("base shares of sector '{}' sum to {}, expected 1", sector,
                                  total));
  return out;
}

}  // namespace

std::map<std::string, double> EnergySystem::base_fuel_use(
    const std::vector<Technology>& technologies, const std::vector<SectorDemand>& demands,
    const ShareCalibration& calibration) {
  std::map<std::string, double> use;
  double electricity = 0.0;
  for (const auto& d : demands) {
    const BaseSector b = collect(technologies, d.sector, calibration);
    for (std::size_t k = 0; k < b.techs.size(); ++k) {
      const Technology& t = technologies[b.techs[k]];
      const double fuel = d.base_demand * b.shares[k] * t.fuel_input;
      if (t.fuel == kElectricity)
        electricity += fuel;
      else if (fuel > 0.0)
        use[t.fuel] += fuel;
    }
  }
  const BaseSector p = collect(technologies, std::string(kElectricity), calibration);
  for (std::size_t k = 0; k < p.techs.size(); ++k) {
    const Technology& t = technologies[p.techs[k]];
    if (electricity * p.shares[k] * t.fuel_input > 0.0)
      use[t.fuel] += electricity * p.shares[k] * t.fuel_input;
  }
  use[std::string(kElectricity)] = electricity;
  return use;
}

EnergySystem::EnergySystem(std::vector<Technology> technologies, std::vector<SectorDemand> demands,
                           const ShareCalibration& calibration, const ChoiceParams& choice,
                           int base_year, const FuelPrices& base_fuel_prices,
                           const DemandDrivers& base_drivers)
    : technologies_(std::move(technologies)),
      choice_(choice),
      base_year_(base_year),
      base_drivers_(base_drivers) {
  for (const auto& [sector, techs] : calibration) {
    for (const auto& [name, entry] : techs) {
      auto it = std::find_if(technologies_.begin(), technologies_.end(),
                             [&](const Technology& t) { return t.name == name; });
      if (it == technologies_.end())
        throw ConfigError("share calibration references unknown technology '" + name + "'");
      if (it->sector != sector)
        throw ConfigError("technology '" + name + "' is not in sector '" + sector + "'");
    }
  }
  auto make_sector = [&](const SectorDemand& d) {
    const BaseSector b = collect(technologies_, d.sector, calibration);
    Sector s;
    s.demand = d;
    s.exponent = choice_.exponent_for(d.sector);
    s.techs = b.techs;
    s.base_shares = b.shares;
    s.future_weights = b.future_weights;
    s.targets = b.targets;
    return s;
  };
  for (const auto& d : demands) {
    if (d.sector == kElectricity) throw ConfigError("electricity demand is derived, not given");
    if (d.base_demand < 0.0) throw ConfigError("sector '" + d.sector + "': negative demand");
    end_uses_.push_back(make_sector(d));
  }
  power_ = make_sector(SectorDemand{std::string(kElectricity), 0.0, 0.0, 0.0});
  base_electricity_demand_ =
      base_fuel_use(technologies_, demands, calibration).at(std::string(kElectricity));
  power_.demand.base_demand = base_electricity_demand_;
  calibrate(base_fuel_prices);
}

const Technology& EnergySystem::technology(std::string_view name) const {
  for (const auto& t : technologies_)
    if (t.name == name) return t;
  throw std::out_of_range("unknown technology " + std::string(name));
}

void EnergySystem::calibrate(const FuelPrices& base_fuel_prices) {
  auto calibrate_sector = [&](Sector& s, const FuelPrices& fuels) {
    std::vector<double> costs;
    for (std::size_t k = 0; k < s.techs.size(); ++k) {
      const Technology& t = technologies_[s.techs[k]];
      costs.push_back(std::max(tech_levelized_cost(t, base_year_, fuels, 0.0, 0.0),
                               choice_.cost_floor));
    }
    s.weights = calibrate_share_weights(costs, s.base_shares, s.future_weights, s.exponent);
    s.base_price = 0.0;
    for (std::size_t k = 0; k < costs.size(); ++k) s.base_price += s.base_shares[k] * costs[k];
  };
  calibrate_sector(power_, base_fuel_prices);
  FuelPrices with_elec = base_fuel_prices;
  with_elec[std::string(kElectricity)] = power_.base_price;
  for (auto& s : end_uses_) calibrate_sector(s, with_elec);
}

EnergySystem::Choice EnergySystem::choose(const Sector& sector, int year, const FuelPrices& fuels,
                                          const EnergyPrices& prices) const {
  Choice c;
  std::vector<double> weights(sector.techs.size(), 0.0);
  c.costs.resize(sector.techs.size());
  for (std::size_t k = 0; k < sector.techs.size(); ++k) {
    const Technology& t = technologies_[sector.techs[k]];
    c.costs[k] = std::max(
        tech_levelized_cost(t, year, fuels, prices.carbon_price, prices.storage_cost),
        choice_.cost_floor);
    if (t.available_from > year) continue;
    weights[k] = sector.weights[k];
    if (!std::isnan(sector.targets[k]) && choice_.convergence_year > base_year_) {
      const double w = std::clamp(static_cast<double>(year - base_year_) /
                                      (choice_.convergence_year - base_year_),
                                  0.0, 1.0);
      weights[k] += w * (sector.targets[k] - weights[k]);
    }
  }
  bool any = std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
  if (!any) {
    c.shares.assign(sector.techs.size(), 0.0);
    c.composite = sector.base_price;
    return c;
  }
  c.shares = logit_shares(c.costs, weights, sector.exponent);
  for (std::size_t k = 0; k < c.costs.size(); ++k) c.composite += c.shares[k] * c.costs[k];
  return c;
}

double EnergySystem::electricity_price(int year, const EnergyPrices& prices) const {
  return choose(power_, year, prices.fuels, prices).composite;
}

SectorOutcome EnergySystem::run_sector(const Sector& sector, int year, double demand,
                                       const Choice& choice,
                                       const std::vector<double>& existing) const {
  SectorOutcome out;
  out.sector = sector.demand.sector;
  out.demand = demand;
  out.composite_price = choice.composite;
  const std::size_t n = sector.techs.size();
  out.activity.assign(n, 0.0);
  out.new_capacity.assign(n, 0.0);
  double existing_total = 0.0;
  if (!existing.empty())
    for (std::size_t k = 0; k < n; ++k) existing_total += existing[sector.techs[k]];
  const double utilization = existing_total > 0.0 ? std::min(1.0, demand / existing_total) : 0.0;
  const double added = std::max(demand - existing_total, 0.0);
  const bool any_share =
      std::any_of(choice.shares.begin(), choice.shares.end(), [](double s) { return s > 0.0; });
  if (added > 0.0 && !any_share)
    throw InfeasibleError(year, fmt::format("no feasible technology for sector '{}' in {}",
                                            out.sector, year));
  for (std::size_t k = 0; k < n; ++k) {
    const Technology& t = technologies_[sector.techs[k]];
    out.technologies.push_back(t.name);
    out.new_capacity[k] = added * choice.shares[k];
    const double old = existing.empty() ? 0.0 : existing[sector.techs[k]];
    const double a = utilization * old + out.new_capacity[k];
    out.activity[k] = a;
    if (a == 0.0) continue;
    if (t.fuel_input > 0.0) out.fuel_use[t.fuel] += a * t.fuel_input;
    const double net = t.net_emission_factor();
    if (t.negative_emission())
      out.removal -= a * net;
    else
      out.gross_co2 += a * net;
    out.captured += a * t.captured_per_unit();
    out.water_km3 += a * t.water;
  }
  return out;
}

void EnergySystem::accumulate(const Sector& sector, const SectorOutcome& s,
                              DispatchResult& r) const {
  for (const auto& [fuel, amount] : s.fuel_use)
    if (fuel != kElectricity) r.fuel_use[fuel] += amount;
  r.gross_co2 += s.gross_co2;
  r.beccs_removal += s.removal;
  r.captured_co2 += s.captured;
  r.water_km3 += s.water_km3;
  for (std::size_t k = 0; k < sector.techs.size(); ++k) {
    const Technology& t = technologies_[sector.techs[k]];
    const std::string cat = primary_category(t);
    if (!cat.empty() && s.activity[k] > 0.0) r.primary_energy[cat] += s.activity[k] * t.fuel_input;
  }
}

DispatchResult EnergySystem::dispatch(const DispatchInputs& in) const {
  if (!in.existing.empty() && in.existing.size() != technologies_.size())
    throw std::invalid_argument("dispatch: existing capacity vector has wrong size");
  DispatchResult r;
  const Choice power_choice = choose(power_, in.year, in.prices.fuels, in.prices);
  r.electricity_price = power_choice.composite;
  FuelPrices fuels = in.prices.fuels;
  fuels[std::string(kElectricity)] = r.electricity_price;

  const std::string elec(kElectricity);
  double electricity_demand = in.extra_electricity;
  for (const auto& s : end_uses_) {
    const Choice c = choose(s, in.year, fuels, in.prices);
    DemandDrivers now = in.drivers;
    now.price = c.composite;
    DemandDrivers base = base_drivers_;
    base.price = s.base_price;
    const double demand = service_demand(s.demand, now, base);
    r.sectors.push_back(run_sector(s, in.year, demand, c, in.existing));
    auto it = r.sectors.back().fuel_use.find(elec);
    if (it != r.sectors.back().fuel_use.end()) electricity_demand += it->second;
    accumulate(s, r.sectors.back(), r);
  }
  r.sectors.push_back(run_sector(power_, in.year, electricity_demand, power_choice, in.existing));
  accumulate(power_, r.sectors.back(), r);
  return r;
}

std::vector<double> EnergySystem::existing_capacity(
    const std::map<std::string, VintageStock>& stocks) const {
  std::vector<double> out(technologies_.size(), 0.0);
  for (const auto& [sector, stock] : stocks)
    for (const auto& v : stock.vintages) out[technology_index(v.technology)] += v.capacity;
  return out;
}

std::size_t EnergySystem::technology_index(std::string_view name) const {
  for (std::size_t i = 0; i < technologies_.size(); ++i)
    if (technologies_[i].name == name) return i;
  throw std::out_of_range("unknown technology " + std::string(name));
}

std::map<std::string, VintageStock> EnergySystem::initial_stock(int step) const {
  std::map<std::string, VintageStock> stocks;
  auto seed = [&](const Sector& s, double demand) {
    VintageStock& stock = stocks[s.demand.sector];
    for (std::size_t k = 0; k < s.techs.size(); ++k) {
      if (s.base_shares[k] <= 0.0) continue;
      const Technology& t = technologies_[s.techs[k]];
      const int count = std::max(1, static_cast<int>(std::ceil(t.lifetime / step - 1e-9)));
      for (int v = 0; v < count; ++v)
        stock.add(t.name, base_year_ - v * step, demand * s.base_shares[k] / count, t.lifetime);
    }
  };
  for (const auto& s : end_uses_) seed(s, s.demand.base_demand);
  seed(power_, base_electricity_demand_);
  return stocks;
}

DispatchResult dispatch_period(const EnergySystem& system, const DispatchInputs& in) {
  return system.dispatch(in);
}

}  // namespace nzsim
