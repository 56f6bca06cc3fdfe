#include "nzsim/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "nzsim/csv.hpp"
#include "nzsim/errors.hpp"

namespace nzsim {

const std::vector<std::string>& energy_categories() {
  static const std::vector<std::string> cats{"coal",        "coal_ccs", "oil",
                                             "gas",         "gas_ccs",  "biomass",
                                             "biomass_ccs", "nuclear",  "renewables"};
  return cats;
}

std::vector<EmissionsPoint> global_emissions(const SystemState& state) {
  std::map<int, EmissionsPoint> by_year;
  for (const auto& region : state.regions) {
    for (const auto& p : region.periods) {
      EmissionsPoint& e = by_year[p.ledger.year];
      e.year = p.ledger.year;
      e.co2 += p.ledger.net;
      e.ch4 += p.ledger.ch4;
      e.gross_fossil += p.ledger.gross;
    }
  }
  std::vector<EmissionsPoint> out;
  for (const auto& [y, e] : by_year) out.push_back(e);
  return out;
}

RunResult execute(const ScenarioConfig& config) {
  RunResult r;
  r.config = config;
  r.state = run_path(config);
  const auto points = global_emissions(r.state);
  r.climate = run_climate(config.climate, points, config.grid.end_year);
  return r;
}

std::vector<ClimateRecord> rerun_climate(const RunResult& run, const ClimateParams& params) {
  // Energy methane scales with leakage only through the fugitive term; recompute it.
  std::vector<EmissionsPoint> points;
  std::map<int, EmissionsPoint> by_year;
  for (const auto& region : run.state.regions) {
    for (const auto& p : region.periods) {
      EmissionsPoint& e = by_year[p.ledger.year];
      e.year = p.ledger.year;
      e.co2 += p.ledger.net;
      e.gross_fossil += p.ledger.gross;
      const auto& use = p.dispatch.fuel_use;
      auto get = [&](const char* f) {
        auto it = use.find(f);
        return it == use.end() ? 0.0 : it->second;
      };
      e.ch4 += energy_methane(get("gas") + p.dac_gas, get("coal"), get("oil"), params);
    }
  }
  for (const auto& [y, e] : by_year) points.push_back(e);
  return run_climate(params, points, run.config.grid.end_year);
}

namespace {

const PeriodSnapshot& period_of(const RunResult& run, const std::string& region, int year) {
  for (const auto& p : run.state.region(region).periods)
    if (p.ledger.year == year) return p;
  throw std::out_of_range(fmt::format("no period {} for region {}", year, region));
}

}  // namespace

double metric_value(const RunResult& run, const std::string& metric) {
  const auto last = metric.rfind('_');
  if (last == std::string::npos) throw ConfigError("unknown metric '" + metric + "'");
  int year = 0;
  try {
    year = std::stoi(metric.substr(last + 1));
  } catch (const std::exception&) {
    throw ConfigError("metric '" + metric + "' must end in a year");
  }
  const std::string head = metric.substr(0, last);
  if (head == "anomaly" || head == "concentration") {
    for (const auto& c : run.climate)
      if (c.year == year) return head == "anomaly" ? c.anomaly : c.concentration;
    throw ConfigError(fmt::format("metric '{}': year outside the climate run", metric));
  }
  const auto split = head.rfind('_');
  if (split == std::string::npos) throw ConfigError("unknown metric '" + metric + "'");
  const std::string region = head.substr(0, split);
  const std::string field = head.substr(split + 1);
  const EmissionsLedger& l = period_of(run, region, year).ledger;
  if (field == "dac") return l.dac;
  if (field == "price") return l.carbon_price;
  if (field == "negatives") return l.dac + l.beccs + l.afforestation;
  if (field == "net") return l.net;
  if (field == "gross") return l.gross;
  if (field == "beccs") return l.beccs;
  if (field == "afforestation") return l.afforestation;
  if (field == "luc") return l.luc;
  throw ConfigError("unknown metric field '" + field + "'");
}

// ---------------------------------------------------------------------------
// Run output

RunReport write_run(const RunResult& run, const std::filesystem::path& out_dir) {
  const ScenarioConfig& cfg = run.config;
  RunReport rep;
  rep.scenario = cfg.name;
  rep.config_hash = hash_hex(config_hash(cfg));
  rep.overrides = cfg.overrides;
  rep.directory = out_dir / cfg.name;
  std::filesystem::create_directories(rep.directory);
  auto file = [&](const std::string& name) {
    return rep.files[name] = rep.directory / (name + (name == "metadata" ? ".yaml" : ".csv"));
  };

  {
    CsvWriter w(file("ledger"),
                {"scenario", "region", "year", "gross", "luc", "beccs", "dac", "afforestation",
                 "net", "ch4_mt", "carbon_price", "cap", "capped", "fossil_captured",
                 "cumulative_storage"});
    for (const auto& l : run.state.ledger()) {
      w.add(cfg.name).add(l.region).add(l.year).add(l.gross).add(l.luc).add(l.beccs).add(l.dac);
      w.add(l.afforestation).add(l.net).add(l.ch4).add(l.carbon_price);
      if (l.capped) w.add(l.cap); else w.add("");
      w.add(l.capped ? 1 : 0).add(l.fossil_captured).add(l.cumulative_storage);
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(file("climate"), {"scenario", "year", "co2_emissions", "ch4_emissions",
                                  "concentration", "ch4_burden", "forcing", "anomaly"});
    for (const auto& c : run.climate) {
      w.add(cfg.name).add(c.year).add(c.co2).add(c.ch4).add(c.concentration).add(c.ch4_burden);
      w.add(c.forcing).add(c.anomaly);
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(file("energy"), {"scenario", "region", "year", "category", "ej"});
    for (const auto& region : run.state.regions) {
      for (const auto& p : region.periods) {
        for (const auto& cat : energy_categories()) {
          auto it = p.dispatch.primary_energy.find(cat);
          w.add(cfg.name).add(region.region).add(p.ledger.year).add(cat);
          w.add(it == p.dispatch.primary_energy.end() ? 0.0 : it->second);
          w.end_row();
        }
        w.add(cfg.name).add(region.region).add(p.ledger.year).add("dac_heat").add(p.dac_gas);
        w.end_row();
      }
    }
    w.close();
  }
  {
    CsvWriter w(file("sectors"), {"scenario", "region", "year", "sector", "emissions",
                                  "removals", "demand", "composite_price"});
    for (const auto& region : run.state.regions) {
      for (const auto& p : region.periods) {
        const int y = p.ledger.year;
        for (const auto& s : p.dispatch.sectors) {
          w.add(cfg.name).add(region.region).add(y).add(s.sector).add(s.gross_co2);
          w.add(s.removal).add(s.demand).add(s.composite_price);
          w.end_row();
        }
        const double dac_leak = p.ledger.gross - p.dispatch.gross_co2;
        w.add(cfg.name).add(region.region).add(y).add("dac").add(dac_leak).add(p.ledger.dac);
        w.add(p.ledger.dac).add(p.dac_cost);
        w.end_row();
        w.add(cfg.name).add(region.region).add(y).add("land").add(p.ledger.luc);
        w.add(p.ledger.afforestation).add(0.0).add(0.0);
        w.end_row();
      }
    }
    w.close();
  }
  {
    CsvWriter w(file("water"), {"scenario", "region", "year", "food_irrigation",
                                "bioenergy_irrigation", "municipal", "industrial", "dac",
                                "total"});
    for (const auto& region : run.state.regions) {
      for (const auto& p : region.periods) {
        const WaterLedger& x = p.water;
        w.add(cfg.name).add(region.region).add(p.ledger.year).add(x.food_irrigation);
        w.add(x.bioenergy_irrigation).add(x.municipal).add(x.industrial).add(x.dac).add(x.total());
        w.end_row();
      }
    }
    w.close();
  }
  {
    std::vector<std::string> header{"scenario", "region", "year"};
    const auto& uses = cfg.regions.front().land.uses;
    std::vector<std::string> names;
    for (const auto& u : uses) names.push_back(u.name);
    for (const auto& n : names) header.push_back(n);
    header.push_back("crop_price_index");
    CsvWriter w(file("land"), header);
    for (std::size_t r = 0; r < run.state.regions.size(); ++r) {
      const auto& region = run.state.regions[r];
      const auto& region_uses = cfg.region(region.region).land.uses;
      for (const auto& p : region.periods) {
        w.add(cfg.name).add(region.region).add(p.ledger.year);
        for (const auto& n : names) {
          double area = 0.0;
          for (std::size_t i = 0; i < region_uses.size(); ++i)
            if (region_uses[i].name == n) area = p.land.area[i];
          w.add(area);
        }
        w.add(p.land.crop_price_index);
        w.end_row();
      }
    }
    w.close();
  }
  {
    CsvWriter w(file("prices"), {"scenario", "region", "year", "carbon_price", "coal", "oil",
                                 "gas", "biomass", "electricity", "storage_cost", "dac_cost",
                                 "dac_new_capacity", "solver_iterations", "market_rounds"});
    for (const auto& region : run.state.regions) {
      for (const auto& p : region.periods) {
        auto price = [&](const char* f) {
          auto it = p.fuel_prices.find(f);
          return it == p.fuel_prices.end() ? 0.0 : it->second;
        };
        w.add(cfg.name).add(region.region).add(p.ledger.year).add(p.ledger.carbon_price);
        w.add(price("coal")).add(price("oil")).add(price("gas")).add(price("biomass"));
        w.add(price("electricity")).add(p.storage_cost).add(p.dac_cost).add(p.dac_new_capacity);
        w.add(p.solver_iterations).add(p.market_rounds);
        w.end_row();
      }
    }
    w.close();
  }

  const std::string first = cfg.regions.front().name;
  auto try_metric = [&](const std::string& name) {
    try {
      rep.summary[name] = metric_value(run, name);
    } catch (const std::exception&) {
    }
  };
  for (const auto& region : cfg.regions) {
    for (const char* field : {"dac", "price", "negatives", "net"})
      try_metric(fmt::format("{}_{}_2060", region.name, field));
  }
  try_metric("anomaly_2100");
  try_metric("concentration_2100");

  YAML::Emitter meta;
  meta.SetDoublePrecision(12);
  meta << YAML::BeginMap;
  meta << YAML::Key << "scenario" << YAML::Value << cfg.name;
  meta << YAML::Key << "description" << YAML::Value << cfg.description;
  meta << YAML::Key << "config_hash" << YAML::Value << rep.config_hash;
  meta << YAML::Key << "overrides" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : cfg.overrides)
    meta << YAML::Flow << YAML::BeginMap << YAML::Key << "path" << YAML::Value << o.path
         << YAML::Key << "value" << YAML::Value << o.value << YAML::EndMap;
  meta << YAML::EndSeq;
  meta << YAML::Key << "summary" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : rep.summary) meta << YAML::Key << k << YAML::Value << v;
  meta << YAML::EndMap;
  meta << YAML::Key << "files" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : rep.files)
    if (k != "metadata") meta << YAML::Key << k << YAML::Value << v.filename().string();
  meta << YAML::EndMap;
  meta << YAML::EndMap;
  {
    std::ofstream out(file("metadata"));
    out << meta.c_str() << "\n";
    if (!out) throw std::runtime_error("cannot write " + rep.files["metadata"].string());
  }
  return rep;
}

RunReport run_scenario(const std::filesystem::path& config_path,
                       const std::filesystem::path& out_dir,
                       const std::vector<Override>& extra_overrides) {
  const ScenarioConfig cfg = parse_scenario(config_path, extra_overrides);
  RunResult run;
  try {
    run = execute(cfg);
  } catch (const StorageExhaustedError& e) {
    throw StorageExhaustedError(e.year(), cfg.name + ": " + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(e.year(), cfg.name + ": " + e.what());
  }
  return write_run(run, out_dir);
}

// ---------------------------------------------------------------------------
// Sweep

SweepSpec SweepSpec::load(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("sweep spec not found: " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}: {}", path.string(), e.mark.line + 1, e.msg));
  }
  const std::filesystem::path dir = path.parent_path();
  auto where = [&](const YAML::Node& n) {
    return fmt::format("{}:{}", path.string(), n.Mark().line + 1);
  };
  if (!root.IsMap() || !root["base"]) throw ConfigError(path.string() + ": 'base' is required");
  SweepSpec s;
  s.base = (dir / root["base"].as<std::string>()).lexically_normal();
  if (root["metric"]) s.metric = root["metric"].as<std::string>();
  if (!root["variants"] || !root["variants"].IsSequence())
    throw ConfigError(path.string() + ": 'variants' must be a list");
  for (const auto& v : root["variants"]) {
    if (!v["name"]) throw ConfigError(where(v) + ": variant needs a name");
    SweepVariant var;
    var.name = v["name"].as<std::string>();
    if (v["scenario"]) var.scenario = (dir / v["scenario"].as<std::string>()).lexically_normal();
    if (v["overrides"]) {
      if (!v["overrides"].IsSequence()) throw ConfigError(where(v) + ": overrides must be a list");
      for (const auto& o : v["overrides"]) {
        if (!o["path"] || !o["value"])
          throw ConfigError(where(o) + ": override needs 'path' and 'value'");
        var.overrides.push_back({o["path"].as<std::string>(), o["value"].as<std::string>()});
      }
    }
    s.variants.push_back(std::move(var));
  }
  s.validate();
  return s;
}

void SweepSpec::validate() const {
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (v.name.empty()) throw ConfigError("sweep: empty variant name");
    if (!names.insert(v.name).second) throw ConfigError("sweep: duplicate variant '" + v.name + "'");
    if (!v.scenario && v.overrides.empty())
      throw ConfigError("sweep: variant '" + v.name + "' changes nothing");
  }
}

SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, int workers) {
  spec.validate();
  const ScenarioConfig base = parse_scenario(spec.base);
  std::vector<std::optional<ScenarioConfig>> configs(spec.variants.size());
  SweepResult result;
  result.metric = spec.metric;
  for (std::size_t i = 0; i < spec.variants.size(); ++i) {
    const SweepVariant& v = spec.variants[i];
    try {
      ScenarioConfig c = v.scenario ? parse_scenario(*v.scenario, v.overrides)
                                    : parse_scenario(spec.base, v.overrides);
      c.name = v.name;
      configs[i] = std::move(c);
    } catch (const std::exception& e) {
      result.failures.push_back({v.name, e.what()});
    }
  }

  // Slot 0 is the base; slots 1..n the variants.
  std::vector<std::optional<double>> values(spec.variants.size() + 1);
  std::vector<std::string> errors(spec.variants.size() + 1);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < values.size(); k = next++) {
      try {
        if (k > 0 && !configs[k - 1]) continue;
        ScenarioConfig c = k == 0 ? base : *configs[k - 1];
        if (k == 0) c.name = "base";
        const RunResult run = execute(c);
        write_run(run, out_dir);
        values[k] = metric_value(run, spec.metric);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(values.size())));
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  if (!values[0]) throw InfeasibleError(0, "sweep base failed: " + errors[0]);
  result.base_value = *values[0];
  for (std::size_t i = 0; i < spec.variants.size(); ++i) {
    if (!configs[i]) continue;
    if (!values[i + 1]) {
      result.failures.push_back({spec.variants[i].name, errors[i + 1]});
      continue;
    }
    TornadoRow row;
    row.variant = spec.variants[i].name;
    row.value = *values[i + 1];
    row.percent = result.base_value != 0.0
                      ? (row.value - result.base_value) / result.base_value * 100.0
                      : 0.0;
    ScenarioConfig named = *configs[i];
    named.name = base.name;
    named.description = base.description;
    row.changed = config_diff(base, named);
    result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
    return std::abs(a.percent) > std::abs(b.percent);
  });

  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir / "tornado.csv",
              {"variant", "metric", "base_value", "value", "percent_change", "changed"});
  for (const auto& r : result.rows) {
    std::string changed;
    for (const auto& c : r.changed) changed += (changed.empty() ? "" : " ") + c;
    w.add(r.variant).add(spec.metric).add(result.base_value).add(r.value).add(r.percent);
    w.add(changed);
    w.end_row();
  }
  w.close();
  if (!result.failures.empty()) {
    CsvWriter f(out_dir / "failures.csv", {"variant", "message"});
    for (const auto& x : result.failures) {
      std::string msg = x.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      f.add(x.variant).add(msg);
      f.end_row();
    }
    f.close();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Figures

namespace {

CsvTable read_table(const std::filesystem::path& dir, const std::string& name) {
  const auto p = dir / (name + ".csv");
  if (!std::filesystem::exists(p))
    throw ConfigError("figures: run directory " + dir.string() + " has no " + name + ".csv");
  return CsvTable::read(p);
}

}  // namespace

std::vector<std::filesystem::path> emit_figure_data(
    const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir) {
  if (run_dirs.empty()) throw ConfigError("figures: no run directories given");
  for (const auto& d : run_dirs)
    if (!std::filesystem::is_directory(d))
      throw ConfigError("figures: missing scenario directory " + d.string());
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  // Fig 1: global climate with the China net CO2 column alongside.
  {
    const auto path = out_dir / "fig1_climate.csv";
    CsvWriter w(path, {"scenario", "year", "global_net_co2", "china_net_co2", "concentration",
                       "forcing", "anomaly"});
    for (const auto& d : run_dirs) {
      const CsvTable c = read_table(d, "climate");
      const CsvTable l = read_table(d, "ledger");
      std::map<int, double> china;
      for (std::size_t r = 0; r < l.rows(); ++r)
        if (l.cell(r, "region") == "china")
          china[static_cast<int>(l.number(r, "year"))] = l.number(r, "net");
      for (std::size_t r = 0; r < c.rows(); ++r) {
        const int year = static_cast<int>(c.number(r, "year"));
        if (!china.count(year)) continue;
        w.add(c.cell(r, "scenario")).add(year).add(c.number(r, "co2_emissions"));
        w.add(china[year]).add(c.number(r, "concentration")).add(c.number(r, "forcing"));
        w.add(c.number(r, "anomaly"));
        w.end_row();
      }
    }
    w.close();
    written.push_back(path);
  }
  // Fig 2: sectoral emissions and removals.
  {
    const auto path = out_dir / "fig2_sectors.csv";
    CsvWriter w(path, {"scenario", "region", "year", "sector", "emissions", "removals", "net"});
    for (const auto& d : run_dirs) {
      const CsvTable t = read_table(d, "sectors");
      for (std::size_t r = 0; r < t.rows(); ++r) {
        const double e = t.number(r, "emissions"), x = t.number(r, "removals");
        w.add(t.cell(r, "scenario")).add(t.cell(r, "region")).add(t.cell(r, "year"));
        w.add(t.cell(r, "sector")).add(e).add(x).add(e - x);
        w.end_row();
      }
    }
    w.close();
    written.push_back(path);
  }
  // Fig 3: primary energy with DAC process heat split out of gas CCS.
  {
    const auto path = out_dir / "fig3_primary_energy.csv";
    std::vector<std::string> header{"scenario", "region", "year"};
    for (const auto& c : energy_categories())
      header.push_back(c == "gas_ccs" ? "gas_ccs_reported" : c);
    header.insert(header.end(), {"dac_heat", "gas_ccs_total", "total"});
    CsvWriter w(path, header);
    for (const auto& d : run_dirs) {
      const CsvTable t = read_table(d, "energy");
      std::map<std::tuple<std::string, std::string, int>, std::map<std::string, double>> rows;
      for (std::size_t r = 0; r < t.rows(); ++r)
        rows[{t.cell(r, "scenario"), t.cell(r, "region"), static_cast<int>(t.number(r, "year"))}]
            [t.cell(r, "category")] = t.number(r, "ej");
      for (const auto& [key, v] : rows) {
        auto get = [&](const std::string& k) {
          auto it = v.find(k);
          return it == v.end() ? 0.0 : it->second;
        };
        const double heat = get("dac_heat");
        const double gas_ccs_total = get("gas_ccs");
        double total = 0.0;
        for (const auto& c : energy_categories()) total += get(c);
        w.add(std::get<0>(key)).add(std::get<1>(key)).add(std::get<2>(key));
        for (const auto& c : energy_categories())
          w.add(c == "gas_ccs" ? gas_ccs_total - heat : get(c));
        w.add(heat).add(gas_ccs_total).add(total);
        w.end_row();
      }
    }
    w.close();
    written.push_back(path);
  }
  // Fig 4: water.
  {
    const auto path = out_dir / "fig4_water.csv";
    const std::vector<std::string> cols{"food_irrigation", "bioenergy_irrigation", "municipal",
                                        "industrial", "dac", "total"};
    std::vector<std::string> header{"scenario", "region", "year"};
    header.insert(header.end(), cols.begin(), cols.end());
    CsvWriter w(path, header);
    for (const auto& d : run_dirs) {
      const CsvTable t = read_table(d, "water");
      for (std::size_t r = 0; r < t.rows(); ++r) {
        w.add(t.cell(r, "scenario")).add(t.cell(r, "region")).add(t.cell(r, "year"));
        for (const auto& c : cols) w.add(t.number(r, c));
        w.end_row();
      }
    }
    w.close();
    written.push_back(path);
  }
  // Fig 5a: land-use change relative to the first period.
  {
    const auto path = out_dir / "fig5a_land.csv";
    CsvWriter w(path, {"scenario", "region", "year", "use", "area_km2", "change_km2"});
    for (const auto& d : run_dirs) {
      const CsvTable t = read_table(d, "land");
      std::vector<std::string> uses;
      for (const auto& h : t.header())
        if (h != "scenario" && h != "region" && h != "year" && h != "crop_price_index")
          uses.push_back(h);
      std::map<std::string, std::map<std::string, double>> first;
      for (std::size_t r = 0; r < t.rows(); ++r) {
        const std::string region = t.cell(r, "region");
        for (const auto& u : uses) {
          const double area = t.number(r, u);
          if (!first[region].count(u)) first[region][u] = area;
          w.add(t.cell(r, "scenario")).add(region).add(t.cell(r, "year")).add(u).add(area);
          w.add(area - first[region][u]);
          w.end_row();
        }
      }
    }
    w.close();
    written.push_back(path);
  }
  return written;
}

}  // namespace nzsim
