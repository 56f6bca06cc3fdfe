// Command-line entry point: run one scenario, run a sensitivity sweep, or emit figure data.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nzsim/errors.hpp"
#include "nzsim/report.hpp"

namespace {

std::string default_out() {
  const char* env = std::getenv("NZSIM_OUT");
  return env && *env ? env : "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-region net-zero pathway simulator"};
  app.require_subcommand(1);

  std::string scenario, out = default_out(), spec, figures_out;
  std::vector<std::string> sets, runs;
  int workers = 4;

  auto* run = app.add_subcommand("run", "Solve one scenario and write its tables");
  run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output root (default $NZSIM_OUT or ./out)");
  run->add_option("--set", sets, "Extra override, key.path=value (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "Run a one-at-a-time sensitivity sweep");
  sweep->add_option("--spec", spec, "Sweep spec file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output root (default $NZSIM_OUT or ./out)");
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* figs = app.add_subcommand("figures", "Emit plot-ready tables from run directories");
  figs->add_option("--runs", runs, "Run directories")->required();
  figs->add_option("--out", figures_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::vector<nzsim::Override> overrides;
      for (const auto& s : sets) overrides.push_back(nzsim::parse_override(s));
      const auto start = std::chrono::steady_clock::now();
      const nzsim::RunReport r = nzsim::run_scenario(scenario, out, overrides);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      fmt::print("{} -> {} (hash {}, {:.2f} s)\n", r.scenario, r.directory.string(),
                 r.config_hash, seconds);
      for (const auto& [k, v] : r.summary) fmt::print("  {:<24} {:.6g}\n", k, v);
    } else if (*sweep) {
      const auto s = nzsim::SweepSpec::load(spec);
      const auto start = std::chrono::steady_clock::now();
      const auto result = nzsim::run_sweep(s, out, workers);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      fmt::print("{} base = {:.6g} ({:.1f} s)\n", result.metric, result.base_value, seconds);
      for (const auto& row : result.rows)
        fmt::print("  {:<28} {:>10.4g} {:>+8.1f}%\n", row.variant, row.value, row.percent);
      for (const auto& f : result.failures)
        fmt::print(stderr, "  FAILED {}: {}\n", f.variant, f.message);
    } else if (*figs) {
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      for (const auto& p : nzsim::emit_figure_data(dirs, figures_out))
        fmt::print("{}\n", p.string());
    }
  } catch (const nzsim::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const nzsim::InfeasibleError& e) {
    fmt::print(stderr, "infeasible: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
