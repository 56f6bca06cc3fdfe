#include "nzsim/climate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nzsim/errors.hpp"

namespace nzsim {

void ClimateParams::validate() const {
  const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("climate: pool fractions must sum to 1");
  for (double a : fractions)
    if (a < 0.0) throw ConfigError("climate: pool fractions must be >= 0");
  for (double t : timescales)
    if (!(t > 0.0)) throw ConfigError("climate: timescales must be > 0");
  if (!(c0 > 0.0) || !(gtc_per_ppm > 0.0) || !(co2_per_c > 0.0))
    throw ConfigError("climate: carbon constants must be > 0");
  if (!(feedback > 0.0) || !(fast_capacity > 0.0) || !(slow_capacity > 0.0) || exchange < 0.0)
    throw ConfigError("climate: energy-balance parameters must be positive");
  if (!(ch4_lifetime > 0.0) || ch4_efficiency < 0.0)
    throw ConfigError("climate: methane lifetime must be > 0 and efficiency >= 0");
  if (leakage < 0.0 || leakage > 0.1) throw ConfigError("climate: leakage outside [0, 0.1]");
  if (!(gas_energy_density > 0.0)) throw ConfigError("climate: gas energy density must be > 0");
  if (coal_ch4 < 0.0 || oil_ch4 < 0.0) throw ConfigError("climate: methane factors must be >= 0");
  for (double b : initial_pools)
    if (b < 0.0) throw ConfigError("climate: initial pools must be >= 0");
  if (initial_ch4_burden < 0.0) throw ConfigError("climate: initial methane burden must be >= 0");
}

double ClimateState::concentration(const ClimateParams& p) const {
  return p.c0 + (pools[0] + pools[1] + pools[2] + pools[3]) / p.gtc_per_ppm;
}

ClimateState ClimateState::initial(const ClimateParams& p) {
  ClimateState s;
  s.pools = p.initial_pools;
  s.ch4_burden = p.initial_ch4_burden;
  s.fast = p.initial_fast;
  s.slow = p.initial_slow;
  return s;
}

ClimateState step_carbon(const ClimateState& state, const ClimateParams& p, double co2,
                         double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_carbon: dt must be > 0");
  ClimateState next = state;
  const double added = co2 * dt / p.co2_per_c;
  next.pools[0] += p.fractions[0] * added;
  for (std::size_t i = 1; i < 4; ++i)
    next.pools[i] = (next.pools[i] + p.fractions[i] * added) * std::exp(-dt / p.timescales[i - 1]);
  return next;
}

ClimateState step_methane(const ClimateState& state, const ClimateParams& p, double ch4,
                          double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_methane: dt must be > 0");
  ClimateState next = state;
  const double decay = std::exp(-dt / p.ch4_lifetime);
  next.ch4_burden = state.ch4_burden * decay + ch4 * p.ch4_lifetime * (1.0 - decay);
  return next;
}

double fugitive_methane(double gas_use, const ClimateParams& p) {
  if (gas_use < 0.0) throw std::domain_error("fugitive_methane: gas use must be >= 0");
  // EJ / (MJ/kg) = 1e12 kg = 1e3 Mt.
  const double gas_mass_mt = gas_use / p.gas_energy_density * 1e3;
  return p.leakage * gas_mass_mt;
}

double energy_methane(double gas_use, double coal_use, double oil_use, const ClimateParams& p) {
  return fugitive_methane(gas_use, p) + p.coal_ch4 * coal_use + p.oil_ch4 * oil_use;
}

double radiative_forcing(double co2_ppm, double ch4_burden, double exogenous,
                         const ClimateParams& p) {
  if (!(co2_ppm > 0.0)) throw std::domain_error("radiative_forcing: concentration must be > 0");
  return p.f2x * std::log(co2_ppm / p.c0) / std::log(2.0) + p.ch4_efficiency * ch4_burden +
         exogenous;
}

ClimateState step_temperature(const ClimateState& state, const ClimateParams& p, double forcing,
                              double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_temperature: dt must be > 0");
  // x' = A x + b with fixed point (F/lambda, F/lambda); propagate the deviation with exp(A dt).
  const double a11 = -(p.feedback + p.exchange) / p.fast_capacity;
  const double a12 = p.exchange / p.fast_capacity;
  const double a21 = p.exchange / p.slow_capacity;
  const double a22 = -p.exchange / p.slow_capacity;
  const double equilibrium = forcing / p.feedback;
  const double d1 = state.fast - equilibrium;
  const double d2 = state.slow - equilibrium;

  const double half_trace = 0.5 * (a11 + a22);
  const double det = a11 * a22 - a12 * a21;
  const double root = std::sqrt(std::max(half_trace * half_trace - det, 0.0));
  const double l1 = half_trace + root, l2 = half_trace - root;
  double c_identity, c_matrix;
  if (root > 1e-14) {
    const double e1 = std::exp(l1 * dt), e2 = std::exp(l2 * dt);
    c_identity = (l1 * e2 - l2 * e1) / (l1 - l2);
    c_matrix = (e1 - e2) / (l1 - l2);
  } else {
    const double e = std::exp(half_trace * dt);
    c_identity = e * (1.0 - half_trace * dt);
    c_matrix = e * dt;
  }
  ClimateState next = state;
  next.fast = equilibrium + c_identity * d1 + c_matrix * (a11 * d1 + a12 * d2);
  next.slow = equilibrium + c_identity * d2 + c_matrix * (a21 * d1 + a22 * d2);
  return next;
}

namespace {

EmissionsPoint interpolate(std::span<const EmissionsPoint> points, double year) {
  if (year <= points.front().year) return points.front();
  if (year >= points.back().year) return points.back();
  std::size_t i = 1;
  while (points[i].year < year) ++i;
  const EmissionsPoint& a = points[i - 1];
  const EmissionsPoint& b = points[i];
  const double w = (year - a.year) / (b.year - a.year);
  return {year, a.co2 + w * (b.co2 - a.co2), a.ch4 + w * (b.ch4 - a.ch4),
          a.gross_fossil + w * (b.gross_fossil - a.gross_fossil)};
}

}  // namespace

std::vector<ClimateRecord> run_climate(const ClimateParams& p,
                                       std::span<const EmissionsPoint> points, int end_year) {
  if (points.empty()) throw std::invalid_argument("run_climate: no emissions");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].year > points[i - 1].year))
      throw std::invalid_argument("run_climate: emission years must increase");
  p.validate();

  const int start = static_cast<int>(points.front().year);
  ClimateState s = ClimateState::initial(p);
  auto record = [&](int year, const EmissionsPoint& e) {
    const double ch4 = e.ch4 + p.other_ch4.at(year);
    const double exogenous = p.exogenous_forcing.at(year) + p.forcing_offset.at(year) +
                             p.residual_forcing_per_gt * e.gross_fossil;
    const double conc = s.concentration(p);
    return ClimateRecord{year, e.co2, ch4, conc, s.ch4_burden,
                         radiative_forcing(conc, s.ch4_burden, exogenous, p), s.fast};
  };

  std::vector<ClimateRecord> out;
  out.reserve(static_cast<std::size_t>(end_year - start + 1));
  out.push_back(record(start, interpolate(points, start)));
  for (int year = start; year < end_year; ++year) {
    const EmissionsPoint e = interpolate(points, year);
    s = step_carbon(s, p, e.co2, 1.0);
    s = step_methane(s, p, e.ch4 + p.other_ch4.at(year), 1.0);
    const EmissionsPoint next = interpolate(points, year + 1);
    ClimateRecord r = record(year + 1, next);
    s = step_temperature(s, p, r.forcing, 1.0);
    r.anomaly = s.fast;
    out.push_back(r);
  }
  return out;
}

}  // namespace nzsim
