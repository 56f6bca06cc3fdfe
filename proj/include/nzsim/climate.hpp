#pragma once

#include <array>
#include <span>
#include <vector>

#include "nzsim/series.hpp"

namespace nzsim {

struct ClimateParams {
  // Pool 0 never decays; pools 1..3 decay with tau[0..2].
  std::array<double, 4> fractions{0.2173, 0.2240, 0.2824, 0.2763};
  std::array<double, 3> timescales{394.4, 36.54, 4.304};
  double c0 = 278.0;             // ppm
  double gtc_per_ppm = 2.124;
  double co2_per_c = 3.664;
  double f2x = 3.7;              // W/m2 per doubling
  double feedback = 1.2;         // lambda, W/m2/K
  double fast_capacity = 8.0;    // W yr/m2/K
  double slow_capacity = 100.0;
  double exchange = 0.7;         // W/m2/K between boxes
  double ch4_lifetime = 9.5;     // years
  double ch4_efficiency = 1.65e-4;  // W/m2 per Mt of excess burden
  double leakage = 0.015;        // fraction of gas throughput
  double gas_energy_density = 50.0;  // MJ/kg
  double coal_ch4 = 0.0;         // Mt CH4 per EJ of coal
  double oil_ch4 = 0.0;          // Mt CH4 per EJ of oil
  double residual_forcing_per_gt = 0.0;  // W/m2 per Gt of gross fossil CO2
  YearSeries exogenous_forcing;  // W/m2
  YearSeries other_ch4;          // Mt/yr from outside the energy system
  YearSeries forcing_offset;     // W/m2, scenario-specific non-CO2 difference

  // State at the first climate year.
  std::array<double, 4> initial_pools{};  // GtC above preindustrial
  double initial_ch4_burden = 0.0;        // Mt above preindustrial
  double initial_fast = 0.0;              // K
  double initial_slow = 0.0;

  void validate() const;
  bool operator==(const ClimateParams&) const = default;
};

struct ClimateState {
  std::array<double, 4> pools{};  // GtC
  double ch4_burden = 0.0;        // Mt
  double fast = 0.0;              // K
  double slow = 0.0;

  double concentration(const ClimateParams& p) const;
  static ClimateState initial(const ClimateParams& p);
};

/// Adds `co2` GtCO2/yr for `dt` years to each pool by its fraction, then decays.
ClimateState step_carbon(const ClimateState& state, const ClimateParams& p, double co2, double dt);

/// Exact first-order update of the methane burden under constant emissions.
ClimateState step_methane(const ClimateState& state, const ClimateParams& p, double ch4, double dt);

/// Mt CH4/yr leaked while delivering `gas_use` EJ/yr.
double fugitive_methane(double gas_use, const ClimateParams& p);

/// Fugitive gas plus coal-mine and oil-system methane, Mt/yr.
double energy_methane(double gas_use, double coal_use, double oil_use, const ClimateParams& p);

double radiative_forcing(double co2_ppm, double ch4_burden, double exogenous,
                         const ClimateParams& p);

/// Two-box energy balance integrated exactly for forcing held over `dt`.
ClimateState step_temperature(const ClimateState& state, const ClimateParams& p, double forcing,
                              double dt);

struct EmissionsPoint {
  double year = 0.0;
  double co2 = 0.0;          // GtCO2/yr, global net
  double ch4 = 0.0;          // Mt/yr from the energy system
  double gross_fossil = 0.0; // GtCO2/yr, global
};

struct ClimateRecord {
  int year = 0;
  double co2 = 0.0;
  double ch4 = 0.0;
  double concentration = 0.0;
  double ch4_burden = 0.0;
  double forcing = 0.0;
  double anomaly = 0.0;
};

/// Annual integration from the first point to `end_year`; emissions are linear between points.
std::vector<ClimateRecord> run_climate(const ClimateParams& p,
                                       std::span<const EmissionsPoint> points, int end_year);

}  // namespace nzsim
