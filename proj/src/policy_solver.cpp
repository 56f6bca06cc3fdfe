#include "nzsim/policy_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "nzsim/climate.hpp"
#include "nzsim/errors.hpp"

namespace nzsim {

namespace {

constexpr const char* kGas = "gas";
constexpr const char* kBiomass = "biomass";
constexpr double kMinBiomassPrice = 1e-3;
constexpr double kMaxBiomassPrice = 1e4;

DemandDrivers drivers_at(const Socioeconomics& s, double year) {
  return {s.population.at(year), s.gdp_per_capita.at(year), 1.0, s.demand_efficiency.at(year)};
}

double lookup(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

RegionModel::RegionModel(const ScenarioConfig& config, const RegionConfig& region)
    : grid_(config.grid),
      dac_(config.dac),
      linkage_(config.luc_linkage),
      climate_(config.climate),
      solver_(config.solver),
      region_(region),
      storage_(region.effective_storage()) {
  base_fuel_use_ =
      EnergySystem::base_fuel_use(config.technologies, region.demands, region.shares);
  for (const auto& t : config.technologies) {
    if (t.fuel.empty() || t.fuel == kElectricity || t.fuel == kBiomass) continue;
    if (!region.fuels.count(t.fuel))
      throw ConfigError(fmt::format("regions.{}.fuels: no market for fuel '{}' used by '{}'",
                                    region.name, t.fuel, t.name));
  }
  base_biomass_price_ = LandModel::clearing_base_price(region.land, lookup(base_fuel_use_, kBiomass));
  base_drivers_ = drivers_at(region.socio, grid_.start_year);

  FuelPrices base_prices;
  for (const auto& [fuel, m] : region.fuels) base_prices[fuel] = m.price;
  base_prices[kBiomass] = base_biomass_price_;
  energy_ = std::make_unique<EnergySystem>(config.technologies, region.demands, region.shares,
                                           config.choice, grid_.start_year, base_prices,
                                           base_drivers_);
  land_ = std::make_unique<LandModel>(region.land, grid_.start_year, base_biomass_price_);
}

RegionState RegionModel::initial_state() const {
  RegionState s;
  s.stocks = energy_->initial_stock(grid_.step);
  s.cumulative_storage = storage_.cumulative_injected;
  s.forest_area = land_->base_area(kForestLand);
  s.price_hint = market_prices(grid_.start_year, base_fuel_use_);
  s.price_hint[kBiomass] = base_biomass_price_;
  return s;
}

FuelPrices RegionModel::market_prices(int year, const std::map<std::string, double>& use) const {
  FuelPrices prices;
  const double elapsed = year - grid_.start_year;
  for (const auto& [fuel, m] : region_.fuels) {
    double p = m.price * std::pow(1.0 + m.trend, elapsed);
    const double base = lookup(base_fuel_use_, fuel);
    if (m.elasticity != 0.0 && base > 0.0)
      p *= std::pow(std::max(lookup(use, fuel) / base, 0.05), m.elasticity);
    prices[fuel] = p;
  }
  return prices;
}

double RegionModel::clear_biomass(const LandPrices& prices, double demand) const {
  auto excess = [&](double log_price) {
    LandPrices p = prices;
    p.biomass_price = std::exp(log_price);
    return land_->allocate(p).biomass_supply() - demand;
  };
  double lo = std::log(kMinBiomassPrice), hi = std::log(kMaxBiomassPrice);
  if (excess(lo) >= 0.0) return kMinBiomassPrice;
  if (excess(hi) <= 0.0) return kMaxBiomassPrice;
  boost::uintmax_t iterations = 100;
  auto tol = [](double a, double b) { return std::abs(a - b) < 1e-10; };
  const auto root = boost::math::tools::toms748_solve(excess, lo, hi, tol, iterations);
  return std::exp(0.5 * (root.first + root.second));
}

PeriodSnapshot RegionModel::evaluate(const RegionState& state, int year,
                                     double carbon_price) const {
  if (carbon_price < 0.0) throw std::domain_error("evaluate: carbon price must be >= 0");
  PeriodSnapshot snap;
  EmissionsLedger& led = snap.ledger;
  led.region = region_.name;
  led.year = year;
  led.carbon_price = carbon_price;

  std::map<std::string, VintageStock> stocks;
  for (const auto& [sector, stock] : state.stocks) stocks[sector] = retire_and_roll(stock, year);
  const std::vector<double> existing = energy_->existing_capacity(stocks);

  double dac_old = 0.0, dac_old_gas = 0.0, dac_old_elec = 0.0;
  for (const auto& v : state.dac) {
    if (year - v.build_year >= v.lifetime) continue;
    dac_old += v.capacity;
    dac_old_gas += v.capacity * v.gas;
    dac_old_elec += v.capacity * v.elec;
  }

  snap.storage_cost = storage_marginal_cost(storage_, state.cumulative_storage);
  snap.luc_fraction = luc_price_fraction(linkage_, year);
  const DemandDrivers drivers = drivers_at(region_.socio, year);
  const double elapsed = year - grid_.start_year;
  LandPrices land_prices;
  land_prices.year = year;
  land_prices.carbon_price = carbon_price;
  land_prices.luc_fraction = snap.luc_fraction;
  land_prices.food_requirement = drivers.population / base_drivers_.population *
                                 std::pow(1.0 + region_.land.food_yield_growth, -elapsed);

  const bool dac_open = dac_.enabled && year >= dac_.available_from;
  const DacCoefficients coef = year >= 2020 ? dac_params_at(dac_, year) : dac_params_at(dac_, 2020);
  const double heat_co2_per_t = coef.gas * dac_.gas_emission_factor;

  FuelPrices fuels = state.price_hint;
  for (const auto& [fuel, p] : market_prices(year, base_fuel_use_))
    if (!fuels.count(fuel)) fuels[fuel] = p;
  if (!fuels.count(kBiomass)) fuels[kBiomass] = base_biomass_price_;

  DispatchInputs in;
  in.year = year;
  in.drivers = drivers;
  in.existing = existing;
  in.prices.carbon_price = carbon_price;
  in.prices.storage_cost = snap.storage_cost;

  // Fossil markets take damped steps. Biomass supply is steep, so its price is bracketed on
  // log price and refined by Illinois regula falsi instead.
  const double damping = 0.6;
  double x = std::log(std::clamp(fuels.at(kBiomass), kMinBiomassPrice, kMaxBiomassPrice));
  double lo = 0.0, hi = 0.0, g_lo = 0.0, g_hi = 0.0;
  bool has_lo = false, has_hi = false;
  int last_side = 0;
  for (int round = 1; round <= solver_.market_rounds; ++round) {
    fuels[kBiomass] = std::exp(x);
    in.prices.fuels = fuels;
    snap.market_rounds = round;
    snap.dac_new_capacity = 0.0;
    if (dac_open) {
      const double elec_price = energy_->electricity_price(year, in.prices);
      const double dac_storage =
          snap.storage_cost * (1.0 + heat_co2_per_t * dac_.capture_fraction);
      snap.dac_cost =
          dac_levelized_cost(dac_, year, fuels.at(kGas), elec_price, dac_storage);
      snap.dac_new_capacity = dac_.supply_slope * std::max(carbon_price - snap.dac_cost, 0.0);
    }
    snap.dac_gas = dac_old_gas + snap.dac_new_capacity * coef.gas;
    snap.dac_elec = dac_old_elec + snap.dac_new_capacity * coef.elec;
    in.extra_electricity = snap.dac_elec;
    snap.dispatch = energy_->dispatch(in);

    std::map<std::string, double> use = snap.dispatch.fuel_use;
    use[kGas] += snap.dac_gas;
    const FuelPrices target = market_prices(year, use);
    const double g = std::log(clear_biomass(land_prices, lookup(use, kBiomass))) - x;

    double change = std::abs(g);
    for (const auto& [fuel, p] : target) {
      if (fuel == kBiomass) continue;
      const double current = fuels.at(fuel);
      if (current > 0.0 && p > 0.0) change = std::max(change, std::abs(p / current - 1.0));
      else if (current != p) change = std::max(change, 1.0);
    }
    if (change <= solver_.market_tolerance) break;
    for (const auto& [fuel, p] : target) {
      if (fuel == kBiomass) continue;
      double& current = fuels[fuel];
      current = (current > 0.0 && p > 0.0)
                    ? std::exp((1.0 - damping) * std::log(current) + damping * std::log(p))
                    : p;
    }

    if (g > 0.0) {
      if (last_side > 0) g_hi *= 0.5;
      lo = x, g_lo = g, has_lo = true, last_side = 1;
    } else if (g < 0.0) {
      if (last_side < 0) g_lo *= 0.5;
      hi = x, g_hi = g, has_hi = true, last_side = -1;
    }
    // Fossil prices move between rounds, so an old bracket end can go stale; drop it.
    if (has_lo && has_hi && !(lo < hi)) {
      if (last_side > 0) has_hi = false;
      else has_lo = false;
      last_side = 0;
    }
    x = (has_lo && has_hi) ? lo - g_lo * (hi - lo) / (g_hi - g_lo) : x + g;
  }
  snap.fuel_prices = in.prices.fuels;
  snap.fuel_prices[std::string(kElectricity)] = snap.dispatch.electricity_price;

  land_prices.biomass_price = in.prices.fuels.at(kBiomass);
  snap.land = land_->allocate(land_prices);

  const double dac_heat_co2 = snap.dac_gas * dac_.gas_emission_factor;
  snap.dac_heat_captured = dac_heat_co2 * dac_.capture_fraction;
  const double dac_removal = dac_old + snap.dac_new_capacity;
  const LandUse& forest = region_.land.use(kForestLand);

  led.gross = snap.dispatch.gross_co2 + (dac_heat_co2 - snap.dac_heat_captured);
  led.beccs = snap.dispatch.beccs_removal;
  led.dac = dac_removal;
  led.afforestation =
      afforestation_sink(snap.land.forest_area - forest.base_area, forest.uptake);
  led.luc = region_.luc_emissions.at(year) +
            std::max(state.forest_area - snap.land.forest_area, 0.0) *
                region_.land.forest_carbon_density * 1e-9 / grid_.step;
  led.net = EmissionsLedger::net_of(led.gross, led.luc, led.beccs, led.dac, led.afforestation);
  led.fossil_captured =
      snap.dispatch.captured_co2 - snap.dispatch.beccs_removal + snap.dac_heat_captured;

  const double gas_total = lookup(snap.dispatch.fuel_use, kGas) + snap.dac_gas;
  led.ch4 = energy_methane(gas_total, lookup(snap.dispatch.fuel_use, "coal"),
                           lookup(snap.dispatch.fuel_use, "oil"), climate_);

  if (snap.dac_gas > 0.0)
    snap.dispatch.primary_energy[dac_.capture_fraction > 0.0 ? "gas_ccs" : "gas"] += snap.dac_gas;

  snap.storage_flow = snap.dispatch.captured_co2 + dac_removal + snap.dac_heat_captured;
  led.cumulative_storage = state.cumulative_storage + grid_.step * snap.storage_flow;
  if (led.cumulative_storage > storage_.total_capacity())
    throw StorageExhaustedError(
        year, fmt::format("{} {}: storage demand {:.3f} Gt exceeds capacity {:.3f} Gt",
                          region_.name, year, led.cumulative_storage,
                          storage_.total_capacity()));

  const double irrigation_trend = region_.food_irrigation_trend.at(year);
  WaterActivities wa;
  wa.food_area_km2 = snap.land.food_area;
  wa.bioenergy_area_km2 = snap.land.bioenergy_area;
  wa.population_millions = drivers.population;
  wa.energy_water_km3 = snap.dispatch.water_km3;
  wa.dac_removal_gt = dac_removal;
  WaterCoefficients wc;
  wc.food_irrigation = region_.land.use(kFoodLand).irrigation * irrigation_trend;
  wc.bioenergy_irrigation = region_.land.use(kBioenergyLand).irrigation;
  wc.municipal = region_.socio.municipal_water.at(year);
  wc.dac = dac_.water;
  snap.water = water_account(wa, wc);
  return snap;
}

void RegionModel::commit(RegionState& state, const PeriodSnapshot& snap) const {
  const int year = snap.ledger.year;
  for (auto& [sector, stock] : state.stocks) stock = retire_and_roll(stock, year);
  for (const auto& outcome : snap.dispatch.sectors) {
    VintageStock& stock = state.stocks[outcome.sector];
    for (std::size_t k = 0; k < outcome.technologies.size(); ++k) {
      const Technology& t = energy_->technology(outcome.technologies[k]);
      stock.add(t.name, year, outcome.new_capacity[k], t.lifetime);
    }
  }
  std::erase_if(state.dac, [&](const DacVintage& v) { return year - v.build_year >= v.lifetime; });
  if (snap.dac_new_capacity > 0.0) {
    const DacCoefficients coef = dac_params_at(dac_, std::max(year, 2020));
    state.dac.push_back({year, snap.dac_new_capacity, coef.gas, coef.elec, dac_.lifetime});
  }
  state.cumulative_storage = snap.ledger.cumulative_storage;
  state.forest_area = snap.land.forest_area;
  state.price_hint = snap.fuel_prices;
  state.price_hint.erase(std::string(kElectricity));
}

BisectionResult bisect_price(const std::function<double(double)>& net, double cap,
                             const SolverParams& params, int year) {
  const double tol = std::max(params.abs_tolerance, params.rel_tolerance * std::abs(cap));
  bool exhausted = false;
  auto eval = [&](double price) {
    exhausted = false;
    try {
      return net(price);
    } catch (const StorageExhaustedError&) {
      exhausted = true;
      return -std::numeric_limits<double>::infinity();
    }
  };

  const double at_zero = eval(0.0);
  if (exhausted)
    throw StorageExhaustedError(year, fmt::format("storage exhausted in {} even at zero price", year));
  if (at_zero <= cap + tol) return {0.0, at_zero, 0, true};

  const double at_ceiling = eval(params.price_ceiling);
  if (!exhausted && at_ceiling > cap + tol)
    throw InfeasibleError(
        year, fmt::format("cap {:.6g} Gt infeasible in {}: net(0) = {:.6g}, net({}) = {:.6g}",
                          cap, year, at_zero, params.price_ceiling, at_ceiling));
  if (!exhausted && std::abs(at_ceiling - cap) <= tol)
    return {params.price_ceiling, at_ceiling, 1, false};

  double lo = 0.0, hi = params.price_ceiling;
  double net_lo = at_zero, net_hi = at_ceiling;
  for (int it = 1; it <= params.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = eval(mid);
    if (!exhausted && std::abs(v - cap) <= tol) return {mid, v, it, false};
    if (!exhausted && v > cap) {
      lo = mid;
      net_lo = v;
    } else {
      hi = mid;
      net_hi = v;
    }
  }
  throw InfeasibleError(
      year, fmt::format("no price meets cap {:.6g} Gt in {} within {} iterations: "
                        "net({:.6g}) = {:.6g}, net({:.6g}) = {:.6g}",
                        cap, year, params.max_iterations, lo, net_lo, hi, net_hi));
}

double net_emissions_at_price(const RegionModel& model, const RegionState& state, int year,
                              double carbon_price, PeriodSnapshot* snapshot) {
  PeriodSnapshot s = model.evaluate(state, year, carbon_price);
  const double net = s.ledger.net;
  if (snapshot) *snapshot = std::move(s);
  return net;
}

PeriodSnapshot solve_carbon_price(const RegionModel& model, const RegionState& state, int year,
                                  double cap, const SolverParams& params) {
  const BisectionResult r = bisect_price(
      [&](double p) { return net_emissions_at_price(model, state, year, p); }, cap, params, year);
  PeriodSnapshot snap = model.evaluate(state, year, r.price);
  snap.solver_iterations = r.iterations;
  snap.ledger.cap = cap;
  snap.ledger.capped = true;
  return snap;
}

const RegionPath& SystemState::region(const std::string& name) const {
  for (const auto& r : regions)
    if (r.region == name) return r;
  throw std::out_of_range("no region named " + name);
}

std::vector<EmissionsLedger> SystemState::ledger() const {
  std::vector<EmissionsLedger> out;
  for (const auto& r : regions)
    for (const auto& p : r.periods) out.push_back(p.ledger);
  return out;
}

namespace {

RegionPath run_region(const ScenarioConfig& config, const RegionConfig& region) {
  const RegionModel model(config, region);
  RegionState state = model.initial_state();
  RegionPath path;
  path.region = region.name;
  const CapSpec& spec = region.cap;
  bool cap_ready = false;
  if (spec.kind == CapSpec::Kind::nt2nz && !spec.values.empty()) {
    path.cap.ceiling = spec.values;
    cap_ready = true;
  } else if (spec.kind == CapSpec::Kind::nt2nz && spec.base_emissions) {
    path.cap = nt2nz_cap(*spec.base_emissions, spec.base_year, spec.net_zero_year, config.grid);
    cap_ready = true;
  }

  for (int year : config.grid.years()) {
    try {
      if (spec.kind == CapSpec::Kind::nt2nz && !cap_ready && year >= spec.base_year) {
        // Anchor on the unpriced path: interpolate the last committed net and this
        // period's zero-price candidate at the base year.
        const double now = net_emissions_at_price(model, state, year, 0.0);
        double anchor = now;
        if (!path.periods.empty()) {
          const EmissionsLedger& last = path.periods.back().ledger;
          const double w = static_cast<double>(spec.base_year - last.year) / (year - last.year);
          anchor = last.net + w * (now - last.net);
        }
        path.cap = nt2nz_cap(std::max(anchor, 0.0), spec.base_year, spec.net_zero_year,
                             config.grid);
        cap_ready = true;
      }
      PeriodSnapshot snap;
      if (cap_ready && path.cap.binds(year)) {
        snap = solve_carbon_price(model, state, year, path.cap.at(year), config.solver);
      } else {
        snap = model.evaluate(state, year, 0.0);
      }
      model.commit(state, snap);
      path.periods.push_back(std::move(snap));
    } catch (const InfeasibleError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw InfeasibleError(year, fmt::format("{} {}: {}", region.name, year, e.what()));
    }
  }
  return path;
}

}  // namespace

SystemState run_path(const ScenarioConfig& config) {
  config.validate();
  SystemState s;
  for (const auto& region : config.regions) s.regions.push_back(run_region(config, region));
  return s;
}

}  // namespace nzsim
