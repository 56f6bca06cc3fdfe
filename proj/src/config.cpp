#include "nzsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "nzsim/csv.hpp"
#include "nzsim/errors.hpp"

namespace nzsim {

// ---------------------------------------------------------------------------
// Grid, caps, linkage

std::vector<int> TimeGrid::years() const {
  std::vector<int> out;
  for (int y = start_year; y <= end_year; y += step) out.push_back(y);
  return out;
}

bool TimeGrid::contains(int year) const {
  return year >= start_year && year <= end_year && (year - start_year) % step == 0;
}

void TimeGrid::validate() const {
  if (step <= 0) throw ConfigError("grid: step must be > 0");
  if (start_year >= end_year) throw ConfigError("grid: start_year must be before end_year");
  if ((end_year - start_year) % step != 0)
    throw ConfigError("grid: step must divide end_year - start_year");
}

double CapPath::at(int year) const {
  auto it = ceiling.find(year);
  if (it == ceiling.end()) throw std::out_of_range(fmt::format("no cap defined for {}", year));
  return it->second;
}

void CapPath::check_net_zero(int net_zero_year) const {
  if (ceiling.empty()) throw ConfigError("cap: empty path");
  double previous = ceiling.begin()->second;
  bool reached = false;
  for (const auto& [year, value] : ceiling) {
    if (value > previous)
      throw ConfigError(fmt::format("cap: path increases at {} (non-increasing invariant)", year));
    if (year >= net_zero_year && value != 0.0)
      throw ConfigError(fmt::format(
          "cap: path must be exactly 0 from {} onwards but is {} in {} (net-zero invariant)",
          net_zero_year, value, year));
    if (year == net_zero_year) reached = true;
    previous = value;
  }
  if (!reached)
    throw ConfigError(fmt::format("cap: path never reaches 0 at {} (net-zero invariant)",
                                  net_zero_year));
}

void PolicyLinkage::validate() const {
  if (start_fraction < 0.0 || start_fraction > 1.0)
    throw ConfigError("luc_linkage: start_fraction outside [0,1]");
  if (full_fraction_year <= start_year)
    throw ConfigError("luc_linkage: full_fraction_year must be after start_year");
}

CapPath nt2nz_cap(double base_emissions, int base_year, int net_zero_year, const TimeGrid& grid) {
  if (base_year >= net_zero_year)
    throw ConfigError(fmt::format("cap: base year {} must precede net-zero year {}", base_year,
                                  net_zero_year));
  if (base_emissions < 0.0) throw ConfigError("cap: base emissions must be >= 0");
  CapPath cap;
  const double span = net_zero_year - base_year;
  for (int y : grid.years()) {
    if (y < base_year) continue;
    cap.ceiling[y] = y >= net_zero_year ? 0.0 : base_emissions * (net_zero_year - y) / span;
  }
  return cap;
}

double luc_price_fraction(const PolicyLinkage& l, double year) {
  if (year <= l.start_year) return l.start_fraction;
  if (year >= l.full_fraction_year) return 1.0;
  const double w = (year - l.start_year) / static_cast<double>(l.full_fraction_year - l.start_year);
  return l.start_fraction + w * (1.0 - l.start_fraction);
}

void SolverParams::validate() const {
  if (!(price_ceiling > 0.0)) throw ConfigError("solver: price_ceiling must be > 0");
  if (!(abs_tolerance > 0.0) || rel_tolerance < 0.0)
    throw ConfigError("solver: tolerances must be positive");
  if (max_iterations < 1 || market_rounds < 1)
    throw ConfigError("solver: iteration limits must be >= 1");
  if (!(market_tolerance > 0.0)) throw ConfigError("solver: market_tolerance must be > 0");
}

StorageSupplyCurve RegionConfig::effective_storage() const {
  StorageSupplyCurve c = storage;
  for (auto& t : c.tiers) {
    t.capacity *= storage_capacity_multiplier;
    t.cost *= storage_cost_multiplier;
  }
  return c;
}

const RegionConfig& ScenarioConfig::region(const std::string& name) const {
  for (const auto& r : regions)
    if (r.name == name) return r;
  throw ConfigError("no region named '" + name + "'");
}

namespace {

void check_covers(const YearSeries& s, const TimeGrid& grid, const std::string& what) {
  if (s.empty() || s.knots().begin()->first > grid.start_year ||
      s.knots().rbegin()->first < grid.end_year)
    throw ConfigError(fmt::format("{} does not cover {}-{}", what, grid.start_year,
                                  grid.end_year));
}

}  // namespace

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  grid.validate();
  dac.validate();
  choice.validate();
  solver.validate();
  climate.validate();
  luc_linkage.validate();
  if (regions.empty()) throw ConfigError("regions: at least one region is required");
  std::set<std::string> tech_names;
  for (const auto& t : technologies) tech_names.insert(t.name);
  std::set<std::string> region_names;
  for (const auto& r : regions) {
    if (!region_names.insert(r.name).second)
      throw ConfigError("regions: duplicate region '" + r.name + "'");
    const std::string where = "regions." + r.name;
    for (const auto& [sector, techs] : r.shares)
      for (const auto& [tech, entry] : techs)
        if (!tech_names.count(tech))
          throw ConfigError(fmt::format("{}: sector '{}' references unknown technology '{}'",
                                        where, sector, tech));
    if (r.demands.empty()) throw ConfigError(where + ": no sector demands");
    if (r.cap.kind != CapSpec::Kind::none) {
      if (r.storage.tiers.empty())
        throw ConfigError(where + ": capped region has no storage curve");
      if (!r.cap.values.empty()) CapPath{r.cap.values}.check_net_zero(r.cap.net_zero_year);
      if (r.cap.base_year >= r.cap.net_zero_year)
        throw ConfigError(where + ".cap: base_year must precede net_zero_year");
    }
    if (!r.storage.tiers.empty()) r.storage.validate();
    if (!(r.storage_cost_multiplier > 0.0) || !(r.storage_capacity_multiplier > 0.0))
      throw ConfigError(where + ": storage multipliers must be > 0");
    r.land.validate();
    check_covers(r.socio.population, grid, where + " population");
    check_covers(r.socio.gdp_per_capita, grid, where + " gdp_per_capita");
    check_covers(r.socio.demand_efficiency, grid, where + " demand_efficiency");
    check_covers(r.socio.municipal_water, grid, where + " municipal_water");
    for (const auto& [fuel, m] : r.fuels)
      if (m.price < 0.0) throw ConfigError(where + ".fuels." + fuel + ": negative price");
  }
}

// ---------------------------------------------------------------------------
// YAML reading

namespace {

/// File each parsed node came from, so errors in an extended file point at the right one.
class Origins {
 public:
  void add(const YAML::Node& node, const std::string& file) {
    nodes_.emplace_back(node, file);
    if (node.IsMap()) {
      for (const auto& kv : node) {
        nodes_.emplace_back(kv.first, file);
        add(kv.second, file);
      }
    } else if (node.IsSequence()) {
      for (const auto& item : node) add(item, file);
    }
  }

  const std::string* file_of(const YAML::Node& node) const {
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
      if (it->first.is(node)) return &it->second;
    return nullptr;
  }

 private:
  std::vector<std::pair<YAML::Node, std::string>> nodes_;
};

class Reader {
 public:
  Reader(YAML::Node node, std::string path, std::string source,
         std::shared_ptr<const Origins> origins = nullptr)
      : node_(std::move(node)),
        path_(std::move(path)),
        source_(std::move(source)),
        origins_(std::move(origins)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message,
                         const YAML::Node* at = nullptr) const {
    const YAML::Node& node = at ? *at : node_;
    const YAML::Mark mark = node.Mark();
    const std::string where = key.empty() ? path_ : join(key);
    const std::string* file = origins_ ? origins_->file_of(node) : nullptr;
    if (mark.line >= 0)
      throw ConfigError(fmt::format("{}:{}: {}: {}", file ? *file : source_, mark.line + 1, where,
                                    message));
    throw ConfigError(fmt::format("{}: {}: {}", source_, where, message));
  }

  bool has(const std::string& key) const {
    return node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  Reader child(const std::string& key) {
    if (!has(key)) fail(key, "required section is missing");
    YAML::Node n = raw(key);
    if (!n.IsMap()) fail(key, "expected a mapping", &n);
    return Reader(n, join(key), source_, origins_);
  }

  /// Optional section; returns an empty mapping when absent.
  Reader section(const std::string& key) {
    if (!has(key)) {
      seen_.insert(key);
      return Reader(YAML::Node(YAML::NodeType::Map), join(key), source_, origins_);
    }
    return child(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      seen_.insert(key);
      if (!fallback) fail(key, "required key is missing");
      return *fallback;
    }
    YAML::Node n = raw(key);
    try {
      if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw YAML::Exception(n.Mark(), "not finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(key, "expected a number", &n);
    }
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    const double v = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (v != std::floor(v)) {
      YAML::Node n = node_[key];
      fail(key, "expected an integer", &n);
    }
    return static_cast<int>(v);
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      seen_.insert(key);
      if (!fallback) fail(key, "required key is missing");
      return *fallback;
    }
    YAML::Node n = raw(key);
    if (!n.IsScalar()) fail(key, "expected a string", &n);
    return n.as<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    YAML::Node n = raw(key);
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(key, "expected true or false", &n);
    }
  }

  /// Either a scalar (constant) or a mapping year -> value.
  YearSeries series(const std::string& key, const YearSeries& fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    YAML::Node n = raw(key);
    if (n.IsScalar()) return YearSeries::constant(number(key));
    if (!n.IsMap()) fail(key, "expected a number or a year -> value mapping", &n);
    YearSeries s;
    for (const auto& kv : n) {
      try {
        s.set(kv.first.as<double>(), kv.second.as<double>());
      } catch (const YAML::Exception&) {
        YAML::Node bad = kv.first;
        fail(key, "entries must be numeric year: value pairs", &bad);
      }
    }
    return s;
  }

  template <std::size_t N>
  std::array<double, N> numbers(const std::string& key, const std::array<double, N>& fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    YAML::Node n = raw(key);
    if (!n.IsSequence() || n.size() != N)
      fail(key, fmt::format("expected a list of {} numbers", N), &n);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      try {
        out[i] = n[i].as<double>();
      } catch (const YAML::Exception&) {
        fail(key, "expected numbers", &n);
      }
    }
    return out;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    if (!node_.IsMap()) return out;
    for (const auto& kv : node_) out.push_back(kv.first.as<std::string>());
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) {
        // Keys added while merging an extended file carry no position; their values do.
        YAML::Node k = kv.first.Mark().line >= 0 ? kv.first : kv.second;
        fail(key, "unknown key", &k);
      }
    }
  }

  const std::string& path() const { return path_; }
  const std::string& source() const { return source_; }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::string source_;
  std::shared_ptr<const Origins> origins_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// CSV tables keyed by region

std::map<std::string, std::vector<SectorDemand>> load_demands(const std::filesystem::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  std::map<std::string, std::vector<SectorDemand>> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    SectorDemand d{t.cell(r, "sector"), t.number(r, "base_demand"),
                   t.number(r, "income_elasticity"), t.number(r, "price_elasticity")};
    if (d.base_demand < 0.0)
      throw ConfigError(fmt::format("{}:{}: base_demand must be >= 0", t.source(), t.line(r)));
    out[t.cell(r, "region")].push_back(std::move(d));
  }
  return out;
}

std::map<std::string, ShareCalibration> load_shares(const std::filesystem::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  std::map<std::string, ShareCalibration> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    TechShareCalibration c;
    c.base_share = t.number(r, "base_share");
    if (t.has_column("future_weight") && !t.cell(r, "future_weight").empty())
      c.future_weight = t.number(r, "future_weight");
    if (c.base_share < 0.0 || c.future_weight.value_or(0.0) < 0.0)
      throw ConfigError(fmt::format("{}:{}: shares and weights must be >= 0", t.source(), t.line(r)));
    auto& slot = out[t.cell(r, "region")][t.cell(r, "sector")][t.cell(r, "technology")];
    slot = c;
  }
  return out;
}

Socioeconomics load_socio(const CsvTable& t, const std::string& region,
                          const std::string& pathway) {
  Socioeconomics s;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.cell(r, "region") != region || t.cell(r, "pathway") != pathway) continue;
    const double y = t.number(r, "year");
    s.population.set(y, t.number(r, "population"));
    s.gdp_per_capita.set(y, t.number(r, "gdp_per_capita"));
    s.demand_efficiency.set(y, t.number(r, "demand_efficiency"));
    s.municipal_water.set(y, t.number(r, "municipal_water_m3_per_capita"));
  }
  if (s.population.empty())
    throw ConfigError(fmt::format("{}: no rows for region '{}' pathway '{}'", t.source(), region,
                                  pathway));
  return s;
}

/// Raw CSV contents shared by every region of one parse.
struct Tables {
  std::vector<Technology> technologies;
  std::map<std::string, std::vector<SectorDemand>> demands;
  std::map<std::string, ShareCalibration> shares;
  std::map<std::string, StorageSupplyCurve> storage;
  std::map<std::string, std::vector<LandUse>> land;
  CsvTable socio;
};

CapSpec read_cap(Reader r) {
  CapSpec c;
  const std::string kind = r.text("kind", "none");
  if (kind == "none") c.kind = CapSpec::Kind::none;
  else if (kind == "nt2nz") c.kind = CapSpec::Kind::nt2nz;
  else r.fail("kind", "expected 'none' or 'nt2nz'");
  c.base_year = r.integer("base_year", c.base_year);
  c.net_zero_year = r.integer("net_zero_year", c.net_zero_year);
  if (r.has("base_emissions")) {
    YAML::Node n = r.raw("base_emissions");
    if (n.IsScalar() && n.as<std::string>() == "auto") {
      c.base_emissions.reset();
    } else {
      c.base_emissions = r.number("base_emissions");
    }
  } else {
    r.raw("base_emissions");
  }
  const YearSeries values = r.series("values", {});
  for (const auto& [y, v] : values.knots()) c.values[static_cast<int>(y)] = v;
  r.finish();
  return c;
}

LandConfig read_land(Reader r, std::vector<LandUse> uses) {
  LandConfig l;
  l.uses = std::move(uses);
  l.total_area = r.number("total_area");
  l.protection_fraction = r.number("protection_fraction", l.protection_fraction);
  l.exponent = r.number("exponent", l.exponent);
  l.food_demand_elasticity = r.number("food_demand_elasticity", l.food_demand_elasticity);
  l.food_yield_growth = r.number("food_yield_growth", l.food_yield_growth);
  l.bioenergy_yield_growth = r.number("bioenergy_yield_growth", l.bioenergy_yield_growth);
  l.forest_carbon_density = r.number("forest_carbon_density", l.forest_carbon_density);
  l.residue_supply = r.number("residue_supply", l.residue_supply);
  l.residue_half_price = r.number("residue_half_price", l.residue_half_price);
  r.finish();
  return l;
}

RegionConfig read_region(Reader r, const std::string& name, const std::string& pathway,
                         const Tables& tables) {
  RegionConfig g;
  g.name = name;
  g.cap = read_cap(r.section("cap"));
  Reader fuels = r.section("fuels");
  for (const std::string& fuel : fuels.keys()) {
    Reader f = fuels.child(fuel);
    FuelMarket m;
    m.price = f.number("price");
    m.elasticity = f.number("elasticity", 0.0);
    m.trend = f.number("trend", 0.0);
    f.finish();
    g.fuels[fuel] = m;
  }
  fuels.finish();

  auto find = [&](const auto& map, const char* what) -> decltype(map.begin()->second) {
    auto it = map.find(name);
    if (it == map.end()) r.fail("", fmt::format("no {} rows for this region", what));
    return it->second;
  };
  g.demands = find(tables.demands, "demand");
  g.shares = find(tables.shares, "share");
  if (auto it = tables.storage.find(name); it != tables.storage.end()) g.storage = it->second;
  g.storage_cost_multiplier = r.number("storage_cost_multiplier", 1.0);
  g.storage_capacity_multiplier = r.number("storage_capacity_multiplier", 1.0);
  g.land = read_land(r.child("land"), find(tables.land, "land"));
  g.socio = load_socio(tables.socio, name, pathway);
  g.luc_emissions = r.series("luc_emissions", YearSeries::constant(0.0));
  g.food_irrigation_trend = r.series("food_irrigation_trend", YearSeries::constant(1.0));
  r.finish();
  return g;
}

DacParams read_dac(Reader r) {
  DacParams d;
  d.enabled = r.boolean("enabled", d.enabled);
  d.gas_2020 = r.number("gas_2020", d.gas_2020);
  d.gas_2050 = r.number("gas_2050", d.gas_2050);
  d.elec_2020 = r.number("elec_2020", d.elec_2020);
  d.elec_2050 = r.number("elec_2050", d.elec_2050);
  d.nonenergy_2020 = r.number("nonenergy_2020", d.nonenergy_2020);
  d.nonenergy_2050 = r.number("nonenergy_2050", d.nonenergy_2050);
  d.water = r.number("water", d.water);
  d.lifetime = r.number("lifetime", d.lifetime);
  d.capture_fraction = r.number("capture_fraction", d.capture_fraction);
  d.gas_emission_factor = r.number("gas_emission_factor", d.gas_emission_factor);
  d.supply_slope = r.number("supply_slope", d.supply_slope);
  d.available_from = r.integer("available_from", d.available_from);
  r.finish();
  return d;
}

ClimateParams read_climate(Reader r) {
  ClimateParams c;
  c.fractions = r.numbers<4>("fractions", c.fractions);
  c.timescales = r.numbers<3>("timescales", c.timescales);
  c.c0 = r.number("c0", c.c0);
  c.gtc_per_ppm = r.number("gtc_per_ppm", c.gtc_per_ppm);
  c.co2_per_c = r.number("co2_per_c", c.co2_per_c);
  c.f2x = r.number("f2x", c.f2x);
  c.feedback = r.number("feedback", c.feedback);
  c.fast_capacity = r.number("fast_capacity", c.fast_capacity);
  c.slow_capacity = r.number("slow_capacity", c.slow_capacity);
  c.exchange = r.number("exchange", c.exchange);
  c.ch4_lifetime = r.number("ch4_lifetime", c.ch4_lifetime);
  c.ch4_efficiency = r.number("ch4_efficiency", c.ch4_efficiency);
  c.leakage = r.number("leakage", c.leakage);
  c.gas_energy_density = r.number("gas_energy_density", c.gas_energy_density);
  c.coal_ch4 = r.number("coal_ch4", c.coal_ch4);
  c.oil_ch4 = r.number("oil_ch4", c.oil_ch4);
  c.residual_forcing_per_gt = r.number("residual_forcing_per_gt", c.residual_forcing_per_gt);
  c.exogenous_forcing = r.series("exogenous_forcing", YearSeries::constant(0.0));
  c.other_ch4 = r.series("other_ch4", YearSeries::constant(0.0));
  c.forcing_offset = r.series("forcing_offset", YearSeries::constant(0.0));
  c.initial_pools = r.numbers<4>("initial_pools", c.initial_pools);
  c.initial_ch4_burden = r.number("initial_ch4_burden", c.initial_ch4_burden);
  c.initial_fast = r.number("initial_fast", c.initial_fast);
  c.initial_slow = r.number("initial_slow", c.initial_slow);
  r.finish();
  return c;
}

std::filesystem::path data_path(Reader& r, const std::string& key,
                                const std::filesystem::path& base_dir) {
  std::filesystem::path p = r.text(key);
  if (p.is_relative()) p = base_dir / p;
  p = p.lexically_normal();
  if (!std::filesystem::exists(p)) r.fail(key, "data file not found: " + p.string());
  return p;
}

ScenarioConfig read_config(const YAML::Node& root, const std::filesystem::path& base_dir,
                           const std::string& source,
                           std::shared_ptr<const Origins> origins = nullptr) {
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  Reader r(root, "", source, std::move(origins));
  ScenarioConfig c;
  c.name = r.text("name");
  c.description = r.text("description", "");
  c.pathway = r.text("pathway", c.pathway);

  Reader grid = r.section("grid");
  c.grid.start_year = grid.integer("start_year", c.grid.start_year);
  c.grid.end_year = grid.integer("end_year", c.grid.end_year);
  c.grid.step = grid.integer("step", c.grid.step);
  grid.finish();

  Reader data = r.child("data");
  c.data.technologies = data_path(data, "technologies", base_dir);
  c.data.demand = data_path(data, "demand", base_dir);
  c.data.shares = data_path(data, "shares", base_dir);
  c.data.storage = data_path(data, "storage", base_dir);
  c.data.land = data_path(data, "land", base_dir);
  c.data.socioeconomics = data_path(data, "socioeconomics", base_dir);
  data.finish();

  Tables tables{load_technologies(c.data.technologies), load_demands(c.data.demand),
                load_shares(c.data.shares),             load_storage_curves(c.data.storage),
                load_land_uses(c.data.land),            CsvTable::read(c.data.socioeconomics)};
  c.technologies = tables.technologies;

  c.dac = read_dac(r.section("dac"));

  Reader choice = r.section("choice");
  c.choice.default_exponent = choice.number("default_exponent", c.choice.default_exponent);
  c.choice.cost_floor = choice.number("cost_floor", c.choice.cost_floor);
  c.choice.convergence_year = choice.integer("convergence_year", c.choice.convergence_year);
  Reader exps = choice.section("exponents");
  for (const std::string& sector : exps.keys()) c.choice.exponents[sector] = exps.number(sector);
  exps.finish();
  choice.finish();

  Reader link = r.section("luc_linkage");
  c.luc_linkage.start_year = link.integer("start_year", c.luc_linkage.start_year);
  c.luc_linkage.start_fraction = link.number("start_fraction", c.luc_linkage.start_fraction);
  c.luc_linkage.full_fraction_year =
      link.integer("full_fraction_year", c.luc_linkage.full_fraction_year);
  link.finish();

  Reader solver = r.section("solver");
  c.solver.price_ceiling = solver.number("price_ceiling", c.solver.price_ceiling);
  c.solver.abs_tolerance = solver.number("abs_tolerance", c.solver.abs_tolerance);
  c.solver.rel_tolerance = solver.number("rel_tolerance", c.solver.rel_tolerance);
  c.solver.max_iterations = solver.integer("max_iterations", c.solver.max_iterations);
  c.solver.market_rounds = solver.integer("market_rounds", c.solver.market_rounds);
  c.solver.market_tolerance = solver.number("market_tolerance", c.solver.market_tolerance);
  solver.finish();

  c.climate = read_climate(r.section("climate"));

  Reader regions = r.child("regions");
  for (const std::string& name : regions.keys())
    c.regions.push_back(read_region(regions.child(name), name, c.pathway, tables));
  regions.finish();

  if (r.has("overrides")) {
    YAML::Node list = r.raw("overrides");
    if (!list.IsSequence()) r.fail("overrides", "expected a list", &list);
    for (const auto& item : list) {
      if (!item.IsMap() || !item["path"] || !item["value"]) {
        YAML::Node bad = item;
        r.fail("overrides", "each entry needs 'path' and 'value'", &bad);
      }
      c.overrides.push_back({item["path"].as<std::string>(), item["value"].as<std::string>()});
    }
  } else {
    r.raw("overrides");
  }
  r.raw("extends");
  r.finish();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// YAML writing

YAML::Node series_node(const YearSeries& s) {
  YAML::Node n(YAML::NodeType::Map);
  for (const auto& [y, v] : s.knots()) n[y] = v;
  return n;
}

YAML::Node to_node(const ScenarioConfig& c, bool file_names_only) {
  YAML::Node root(YAML::NodeType::Map);
  root["name"] = c.name;
  root["description"] = c.description;
  root["pathway"] = c.pathway;
  root["grid"]["start_year"] = c.grid.start_year;
  root["grid"]["end_year"] = c.grid.end_year;
  root["grid"]["step"] = c.grid.step;
  auto path = [&](const std::filesystem::path& p) {
    return file_names_only ? p.filename().string() : p.string();
  };
  YAML::Node data = root["data"];
  data["technologies"] = path(c.data.technologies);
  data["demand"] = path(c.data.demand);
  data["shares"] = path(c.data.shares);
  data["storage"] = path(c.data.storage);
  data["land"] = path(c.data.land);
  data["socioeconomics"] = path(c.data.socioeconomics);

  YAML::Node dac = root["dac"];
  dac["enabled"] = c.dac.enabled;
  dac["gas_2020"] = c.dac.gas_2020;
  dac["gas_2050"] = c.dac.gas_2050;
  dac["elec_2020"] = c.dac.elec_2020;
  dac["elec_2050"] = c.dac.elec_2050;
  dac["nonenergy_2020"] = c.dac.nonenergy_2020;
  dac["nonenergy_2050"] = c.dac.nonenergy_2050;
  dac["water"] = c.dac.water;
  dac["lifetime"] = c.dac.lifetime;
  dac["capture_fraction"] = c.dac.capture_fraction;
  dac["gas_emission_factor"] = c.dac.gas_emission_factor;
  dac["supply_slope"] = c.dac.supply_slope;
  dac["available_from"] = c.dac.available_from;

  YAML::Node choice = root["choice"];
  choice["default_exponent"] = c.choice.default_exponent;
  choice["cost_floor"] = c.choice.cost_floor;
  choice["convergence_year"] = c.choice.convergence_year;
  choice["exponents"] = YAML::Node(YAML::NodeType::Map);
  for (const auto& [s, g] : c.choice.exponents) choice["exponents"][s] = g;

  root["luc_linkage"]["start_year"] = c.luc_linkage.start_year;
  root["luc_linkage"]["start_fraction"] = c.luc_linkage.start_fraction;
  root["luc_linkage"]["full_fraction_year"] = c.luc_linkage.full_fraction_year;

  YAML::Node solver = root["solver"];
  solver["price_ceiling"] = c.solver.price_ceiling;
  solver["abs_tolerance"] = c.solver.abs_tolerance;
  solver["rel_tolerance"] = c.solver.rel_tolerance;
  solver["max_iterations"] = c.solver.max_iterations;
  solver["market_rounds"] = c.solver.market_rounds;
  solver["market_tolerance"] = c.solver.market_tolerance;

  YAML::Node cl = root["climate"];
  const ClimateParams& p = c.climate;
  cl["fractions"] = std::vector<double>(p.fractions.begin(), p.fractions.end());
  cl["timescales"] = std::vector<double>(p.timescales.begin(), p.timescales.end());
  cl["c0"] = p.c0;
  cl["gtc_per_ppm"] = p.gtc_per_ppm;
  cl["co2_per_c"] = p.co2_per_c;
  cl["f2x"] = p.f2x;
  cl["feedback"] = p.feedback;
  cl["fast_capacity"] = p.fast_capacity;
  cl["slow_capacity"] = p.slow_capacity;
  cl["exchange"] = p.exchange;
  cl["ch4_lifetime"] = p.ch4_lifetime;
  cl["ch4_efficiency"] = p.ch4_efficiency;
  cl["leakage"] = p.leakage;
  cl["gas_energy_density"] = p.gas_energy_density;
  cl["coal_ch4"] = p.coal_ch4;
  cl["oil_ch4"] = p.oil_ch4;
  cl["residual_forcing_per_gt"] = p.residual_forcing_per_gt;
  cl["exogenous_forcing"] = series_node(p.exogenous_forcing);
  cl["other_ch4"] = series_node(p.other_ch4);
  cl["forcing_offset"] = series_node(p.forcing_offset);
  cl["initial_pools"] = std::vector<double>(p.initial_pools.begin(), p.initial_pools.end());
  cl["initial_ch4_burden"] = p.initial_ch4_burden;
  cl["initial_fast"] = p.initial_fast;
  cl["initial_slow"] = p.initial_slow;

  YAML::Node regions = root["regions"];
  for (const RegionConfig& g : c.regions) {
    YAML::Node r = regions[g.name];
    YAML::Node cap = r["cap"];
    cap["kind"] = g.cap.kind == CapSpec::Kind::nt2nz ? "nt2nz" : "none";
    cap["base_year"] = g.cap.base_year;
    cap["net_zero_year"] = g.cap.net_zero_year;
    if (g.cap.base_emissions) cap["base_emissions"] = *g.cap.base_emissions;
    else cap["base_emissions"] = "auto";
    if (!g.cap.values.empty()) {
      YAML::Node v(YAML::NodeType::Map);
      for (const auto& [y, x] : g.cap.values) v[y] = x;
      cap["values"] = v;
    }
    YAML::Node fuels = r["fuels"];
    for (const auto& [fuel, m] : g.fuels) {
      fuels[fuel]["price"] = m.price;
      fuels[fuel]["elasticity"] = m.elasticity;
      fuels[fuel]["trend"] = m.trend;
    }
    r["storage_cost_multiplier"] = g.storage_cost_multiplier;
    r["storage_capacity_multiplier"] = g.storage_capacity_multiplier;
    YAML::Node land = r["land"];
    land["total_area"] = g.land.total_area;
    land["protection_fraction"] = g.land.protection_fraction;
    land["exponent"] = g.land.exponent;
    land["food_demand_elasticity"] = g.land.food_demand_elasticity;
    land["food_yield_growth"] = g.land.food_yield_growth;
    land["bioenergy_yield_growth"] = g.land.bioenergy_yield_growth;
    land["forest_carbon_density"] = g.land.forest_carbon_density;
    land["residue_supply"] = g.land.residue_supply;
    land["residue_half_price"] = g.land.residue_half_price;
    r["luc_emissions"] = series_node(g.luc_emissions);
    r["food_irrigation_trend"] = series_node(g.food_irrigation_trend);
  }

  if (!c.overrides.empty()) {
    YAML::Node list(YAML::NodeType::Sequence);
    for (const Override& o : c.overrides) {
      YAML::Node item;
      item["path"] = o.path;
      item["value"] = o.value;
      list.push_back(item);
    }
    root["overrides"] = list;
  }
  return root;
}

std::string emit(const YAML::Node& node) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << node;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// extends / overrides

void merge_into(YAML::Node base, const YAML::Node& overlay) {
  for (const auto& kv : overlay) {
    const std::string key = kv.first.as<std::string>();
    if (key == "overrides" && base[key] && base[key].IsSequence() && kv.second.IsSequence()) {
      for (const auto& item : kv.second) base[key].push_back(item);
      continue;
    }
    if (base[key] && base[key].IsMap() && kv.second.IsMap()) {
      merge_into(base[key], kv.second);
    } else {
      base[key] = kv.second;
    }
  }
}

/// Rewrites relative data paths against the directory of the file that declares them.
void anchor_data_paths(YAML::Node node, const std::filesystem::path& dir) {
  if (!node["data"] || !node["data"].IsMap()) return;
  for (auto kv : node["data"]) {
    if (!kv.second.IsScalar()) continue;
    std::filesystem::path p = kv.second.as<std::string>();
    if (p.is_relative()) kv.second = std::filesystem::absolute(dir / p).lexically_normal().string();
  }
}

YAML::Node load_tree(const std::filesystem::path& path, int depth, Origins& origins) {
  if (depth > 16) throw ConfigError(path.string() + ": extends chain too deep");
  if (!std::filesystem::exists(path))
    throw ConfigError("scenario file not found: " + path.string());
  YAML::Node node;
  try {
    node = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}: {}", path.string(), e.mark.line + 1, e.msg));
  }
  if (!node.IsMap()) throw ConfigError(path.string() + ": top level must be a mapping");
  const std::filesystem::path dir = path.parent_path();
  anchor_data_paths(node, dir);
  origins.add(node, path.string());
  if (!node["extends"]) return node;
  const std::filesystem::path parent = dir / node["extends"].as<std::string>();
  YAML::Node merged = load_tree(parent, depth + 1, origins);
  merged.remove("extends");
  node.remove("extends");
  merge_into(merged, node);
  return merged;
}

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

void apply_override(YAML::Node root, const Override& o) {
  const std::vector<std::string> parts = split_path(o.path);
  if (parts.empty()) throw ConfigError("override: empty path");
  YAML::Node node = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node.IsMap() || !node[parts[i]])
      throw ConfigError(fmt::format("override '{}': '{}' does not exist", o.path, parts[i]));
    node.reset(node[parts[i]]);
  }
  const std::string& leaf = parts.back();
  YAML::Node value;
  try {
    value = YAML::Load(o.value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("override '{}': cannot parse value '{}'", o.path, o.value));
  }
  if (node.IsSequence()) {
    std::size_t index = 0;
    try {
      index = std::stoul(leaf);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("override '{}': '{}' is not a list index", o.path, leaf));
    }
    if (index >= node.size())
      throw ConfigError(fmt::format("override '{}': index {} out of range", o.path, index));
    node[index] = value;
    return;
  }
  if (!node.IsMap() || !node[leaf])
    throw ConfigError(fmt::format("override '{}': '{}' does not exist", o.path, leaf));
  if (node[leaf].IsMap() && !value.IsMap())
    throw ConfigError(fmt::format("override '{}': cannot replace a section with a scalar", o.path));
  node[leaf] = value;
}

void collect_leaves(const YAML::Node& node, const std::string& prefix,
                    std::map<std::string, std::string>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      collect_leaves(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      collect_leaves(node[i], prefix + "." + std::to_string(i), out);
  } else if (node.IsScalar()) {
    out[prefix] = node.as<std::string>();
  }
}

ScenarioConfig materialize(const YAML::Node& tree, const std::filesystem::path& base_dir,
                           const std::string& source, const std::vector<Override>& extra,
                           std::shared_ptr<const Origins> origins = nullptr) {
  ScenarioConfig first = read_config(tree, base_dir, source, std::move(origins));
  std::vector<Override> all = first.overrides;
  all.insert(all.end(), extra.begin(), extra.end());
  if (all.empty()) return first;
  first.overrides.clear();
  YAML::Node full = to_node(first, false);
  for (const Override& o : all) apply_override(full, o);
  ScenarioConfig c = read_config(full, base_dir, source + " (with overrides)");
  c.overrides = all;
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(const std::filesystem::path& path,
                              const std::vector<Override>& extra_overrides) {
  auto origins = std::make_shared<Origins>();
  const YAML::Node tree = load_tree(path, 0, *origins);
  return materialize(tree, path.parent_path(), path.string(), extra_overrides, origins);
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::string& source) {
  YAML::Node tree;
  try {
    tree = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (!tree.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  if (tree["extends"]) throw ConfigError(source + ": extends needs a file location");
  anchor_data_paths(tree, base_dir);
  return materialize(tree, base_dir, source, {});
}

std::string serialize(const ScenarioConfig& config) { return emit(to_node(config, false)); }

std::uint64_t config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](std::string_view bytes) {
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  feed(emit(to_node(config, true)));
  for (const auto& p : {config.data.technologies, config.data.demand, config.data.shares,
                        config.data.storage, config.data.land, config.data.socioeconomics}) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read data file " + p.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    feed(buffer.str());
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) { return fmt::format("{:016x}", hash); }

std::vector<std::string> config_diff(const ScenarioConfig& a, const ScenarioConfig& b) {
  std::map<std::string, std::string> la, lb;
  ScenarioConfig ca = a, cb = b;
  ca.overrides.clear();
  cb.overrides.clear();
  collect_leaves(to_node(ca, false), "", la);
  collect_leaves(to_node(cb, false), "", lb);
  std::vector<std::string> out;
  for (const auto& [k, v] : la) {
    auto it = lb.find(k);
    if (it == lb.end() || it->second != v) out.push_back(k);
  }
  for (const auto& [k, v] : lb)
    if (!la.count(k)) out.push_back(k);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Override parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  return {assignment.substr(0, eq), assignment.substr(eq + 1)};
}

}  // namespace nzsim
