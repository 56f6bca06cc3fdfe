#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nzsim/climate.hpp"
#include "nzsim/config.hpp"
#include "nzsim/policy_solver.hpp"

namespace nzsim {

/// In-memory result of one scenario: solved path plus climate response.
struct RunResult {
  ScenarioConfig config;
  SystemState state;
  std::vector<ClimateRecord> climate;
};

/// Sums regional net CO2, energy methane and gross fossil CO2 per grid year.
std::vector<EmissionsPoint> global_emissions(const SystemState& state);

RunResult execute(const ScenarioConfig& config);
/// Reruns only the climate step with different parameters.
std::vector<ClimateRecord> rerun_climate(const RunResult& run, const ClimateParams& params);

/// Metric names: "<region>_<field>_<year>" with field one of dac, price, negatives, net, gross,
/// beccs, afforestation, luc; or "anomaly_<year>", "concentration_<year>".
double metric_value(const RunResult& run, const std::string& metric);

struct RunReport {
  std::string scenario;
  std::string config_hash;
  std::vector<Override> overrides;
  std::filesystem::path directory;
  std::map<std::string, std::filesystem::path> files;  // table name -> path
  std::map<std::string, double> summary;
};

/// Writes every table of `run` below `out_dir/<scenario name>`.
RunReport write_run(const RunResult& run, const std::filesystem::path& out_dir);

RunReport run_scenario(const std::filesystem::path& config_path,
                       const std::filesystem::path& out_dir,
                       const std::vector<Override>& extra_overrides = {});

struct SweepVariant {
  std::string name;
  std::optional<std::filesystem::path> scenario;  // file that extends the base
  std::vector<Override> overrides;                // applied on top of the base
};

struct SweepSpec {
  std::filesystem::path base;
  std::string metric = "china_dac_2060";
  std::vector<SweepVariant> variants;

  static SweepSpec load(const std::filesystem::path& path);
  void validate() const;
};

struct TornadoRow {
  std::string variant;
  double value = 0.0;
  double percent = 0.0;
  std::vector<std::string> changed;  // config paths that differ from the base
};

struct SweepFailure {
  std::string variant;
  std::string message;
};

struct SweepResult {
  std::string metric;
  double base_value = 0.0;
  std::vector<TornadoRow> rows;  // sorted by |percent|, largest first
  std::vector<SweepFailure> failures;
};

/// Runs the base and every variant (each into its own directory) on `workers` threads and
/// writes `tornado.csv`. A failing variant is recorded and skipped.
SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, int workers);

/// Reads run directories written by write_run and emits fig1..fig5a CSVs into `out_dir`.
std::vector<std::filesystem::path> emit_figure_data(
    const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

/// Primary-energy categories reported in the energy tables, in column order.
const std::vector<std::string>& energy_categories();

}  // namespace nzsim
