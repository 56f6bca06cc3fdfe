#pragma once

#include <map>
#include <utility>
#include <vector>

namespace nzsim {

/// Piecewise-linear series keyed by year, held constant outside its knots.
class YearSeries {
 public:
  YearSeries() = default;
  explicit YearSeries(std::map<double, double> knots) : knots_(std::move(knots)) {}
  YearSeries(std::initializer_list<std::pair<const double, double>> knots) : knots_(knots) {}

  static YearSeries constant(double value) { return YearSeries({{0.0, value}}); }

  bool empty() const { return knots_.empty(); }
  const std::map<double, double>& knots() const { return knots_; }
  void set(double year, double value) { knots_[year] = value; }

  double at(double year) const {
    if (knots_.empty()) return 0.0;
    auto hi = knots_.lower_bound(year);
    if (hi == knots_.end()) return std::prev(hi)->second;
    if (hi->first == year || hi == knots_.begin()) return hi->second;
    auto lo = std::prev(hi);
    const double w = (year - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

  bool operator==(const YearSeries&) const = default;

 private:
  std::map<double, double> knots_;
};

}  // namespace nzsim
