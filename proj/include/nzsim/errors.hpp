#pragma once

#include <stdexcept>
#include <string>

namespace nzsim {

/// Bad or inconsistent scenario input. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A period that cannot meet its cap (or store its CO2). Maps to exit code 2.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(int year, const std::string& what)
      : std::runtime_error(what), year_(year) {}
  int year() const noexcept { return year_; }

 private:
  int year_;
};

class StorageExhaustedError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

}  // namespace nzsim
