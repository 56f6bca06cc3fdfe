#include <fstream>
#include <random>

#include <yaml-cpp/yaml.h>

#include "doctest.h"
#include "nzsim/config.hpp"
#include "nzsim/errors.hpp"
#include "paths.hpp"

using namespace nzsim;
using nzsim::testing::scenario;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

// Full YAML of a shipped scenario with `edit` applied, parsed back from memory.
ScenarioConfig reparse(const std::function<void(YAML::Node&)>& edit) {
  YAML::Node node = YAML::Load(serialize(parse_scenario(scenario("netzero2060_lowdac.yaml"))));
  edit(node);
  YAML::Emitter out;
  out << node;
  return parse_scenario_text(out.c_str(), scenario(""), "edited.yaml");
}

}  // namespace

TEST_CASE("nt2nz cap endpoints and interior point") {
  const TimeGrid yearly{2021, 2060, 1};
  const CapPath cap = nt2nz_cap(10.0, 2021, 2060, yearly);
  CHECK(cap.at(2021) == doctest::Approx(10.0));
  CHECK(cap.at(2060) == 0.0);
  // 10 * (2060 - 2040) / (2060 - 2021) = 200 / 39
  CHECK(cap.at(2040) == doctest::Approx(5.128205128205128).epsilon(1e-14));
}

TEST_CASE("nt2nz cap on the five-year grid is exactly linear and stays at zero") {
  const TimeGrid grid{};
  const CapPath cap = nt2nz_cap(9.3, 2021, 2060, grid);
  CHECK_FALSE(cap.binds(2020));
  CHECK(cap.binds(2025));
  std::vector<double> diffs;
  for (int y = 2030; y <= 2060; y += 5) diffs.push_back(cap.at(y) - cap.at(y - 5));
  for (double d : diffs) CHECK(std::abs(d - diffs.front()) <= 1e-9 * 9.3);
  for (int y = 2060; y <= 2100; y += 5) CHECK(cap.at(y) == 0.0);
  CHECK_NOTHROW(cap.check_net_zero(2060));
}

TEST_CASE("nt2nz cap rejects a base year after the net-zero year") {
  CHECK_THROWS_AS(nt2nz_cap(5.0, 2060, 2050, TimeGrid{}), ConfigError);
}

TEST_CASE("cap that never reaches zero fails the net-zero check") {
  CapPath cap;
  cap.ceiling = {{2025, 5.0}, {2060, 1.0}, {2065, 1.0}};
  CHECK_THROWS_AS(cap.check_net_zero(2060), ConfigError);
}

TEST_CASE("land price linkage ramp") {
  const PolicyLinkage l{};
  CHECK(luc_price_fraction(l, 2100) == 1.0);
  CHECK(luc_price_fraction(l, 2120) == 1.0);
  CHECK(luc_price_fraction(l, 2020) == 0.0);
  // (2062 - 2025) / 75
  CHECK(luc_price_fraction(l, 2062) == doctest::Approx(37.0 / 75.0).epsilon(1e-14));
  CHECK(luc_price_fraction(l, 2062) == doctest::Approx(0.49333333333).epsilon(1e-9));
}

TEST_CASE("land price linkage is non-decreasing for random linkages") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> start(2000, 2080);
  std::uniform_int_distribution<int> span(1, 100);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    PolicyLinkage l;
    l.start_year = start(rng);
    l.full_fraction_year = l.start_year + span(rng);
    l.start_fraction = frac(rng);
    double previous = -1.0;
    for (double y = 1990; y <= 2200; y += 0.5) {
      const double f = luc_price_fraction(l, y);
      CHECK(f >= previous);
      previous = f;
    }
  }
}

TEST_CASE("shipped low-cost scenario carries the published DAC coefficients") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  CHECK(c.dac.gas_2020 == 8.1);
  CHECK(c.dac.gas_2050 == 5.3);
  CHECK(c.dac.elec_2020 == 1.8);
  CHECK(c.dac.elec_2050 == 1.3);
  CHECK(c.dac.nonenergy_2020 == 300.0);
  CHECK(c.dac.nonenergy_2050 == 180.0);
  CHECK(c.dac.water == 4.7);
  CHECK(c.dac.lifetime == 40.0);
  CHECK(c.dac.enabled);
  const ScenarioConfig high = parse_scenario(scenario("netzero2060_highdac.yaml"));
  CHECK(high.dac.gas_2050 == 8.1);
  CHECK(high.dac.elec_2050 == 1.8);
  CHECK(high.dac.nonenergy_2050 == 300.0);
  CHECK_FALSE(parse_scenario(scenario("netzero2060_nodac.yaml")).dac.enabled);
}

TEST_CASE("every shipped scenario parses") {
  for (const char* name : {"no_policy.yaml", "netzero2060_nodac.yaml", "netzero2060_lowdac.yaml",
                           "netzero2060_highdac.yaml"})
    CHECK_NOTHROW(parse_scenario(scenario(name)));
  for (const auto& entry : std::filesystem::directory_iterator(scenario("sensitivity")))
    CHECK_NOTHROW(parse_scenario(entry.path()));
}

TEST_CASE("serialize then parse reproduces the config") {
  for (const char* name : {"no_policy.yaml", "netzero2060_lowdac.yaml", "sensitivity/low_storage.yaml"}) {
    const ScenarioConfig a = parse_scenario(scenario(name));
    const ScenarioConfig b = parse_scenario_text(serialize(a), scenario(""), name);
    CHECK(config_diff(a, b).empty());
    CHECK(config_hash(a) == config_hash(b));
  }
}

TEST_CASE("missing regions is reported by key") {
  const std::string msg = message_of([] { reparse([](YAML::Node& n) { n.remove("regions"); }); });
  CHECK(msg.find("regions") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string msg =
      message_of([] { reparse([](YAML::Node& n) { n["dac"]["gas_2040"] = 6.0; }); });
  CHECK(msg.find("dac.gas_2040") != std::string::npos);
}

TEST_CASE("schema errors carry the source line") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "nzsim_cfg_line";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.yaml") << "extends: " << scenario("netzero2060_lowdac.yaml").string()
                                  << "\nname: bad\ndac:\n  gas_2050: -1\n";
  const std::string msg = message_of([&] { parse_scenario(dir / "bad.yaml"); });
  CHECK(msg.find("dac") != std::string::npos);
  const std::string typo = message_of([&] {
    std::ofstream(dir / "typo.yaml") << "extends: " << scenario("no_policy.yaml").string()
                                     << "\nname: typo\nsolver:\n  price_cieling: 10\n";
    parse_scenario(dir / "typo.yaml");
  });
  CHECK(typo.find("typo.yaml:4") != std::string::npos);
  CHECK(typo.find("solver.price_cieling") != std::string::npos);
}

TEST_CASE("errors inside an extended file name that file") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "nzsim_cfg_parent";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "parent.yaml") << "extends: " << scenario("no_policy.yaml").string()
                                     << "\nname: parent\ndac:\n  enabled: false\n  water_per_t: 5\n";
  std::ofstream(dir / "child.yaml") << "extends: parent.yaml\nname: child\n";
  const std::string msg = message_of([&] { parse_scenario(dir / "child.yaml"); });
  CHECK(msg.find("parent.yaml:5") != std::string::npos);
  CHECK(msg.find("dac.water_per_t") != std::string::npos);
}

TEST_CASE("invariant violations name the invariant") {
  CHECK(message_of([] { reparse([](YAML::Node& n) { n["grid"]["step"] = 7; }); }).find("step") !=
        std::string::npos);
  CHECK_THROWS_AS(reparse([](YAML::Node& n) { n["climate"]["leakage"] = 0.2; }), ConfigError);
  CHECK_THROWS_AS(reparse([](YAML::Node& n) { n["regions"]["china"]["land"]["protection_fraction"] = 1.5; }),
                  ConfigError);
}

TEST_CASE("missing scenario file") {
  CHECK_THROWS_AS(parse_scenario(scenario("does_not_exist.yaml")), ConfigError);
}

TEST_CASE("overrides replace leaves, are recorded, and must exist") {
  const ScenarioConfig c = parse_scenario(scenario("netzero2060_lowdac.yaml"),
                                          {parse_override("dac.nonenergy_2050=78"),
                                           parse_override("climate.initial_pools.0=100")});
  CHECK(c.dac.nonenergy_2050 == 78.0);
  CHECK(c.climate.initial_pools[0] == 100.0);
  REQUIRE(c.overrides.size() == 2);
  CHECK(c.overrides[0].path == "dac.nonenergy_2050");
  CHECK_THROWS_AS(parse_scenario(scenario("netzero2060_lowdac.yaml"),
                                 {parse_override("dac.no_such_key=1")}),
                  ConfigError);
  CHECK_THROWS_AS(parse_override("no_equals_sign"), ConfigError);
}

TEST_CASE("sensitivity files differ from their base only where they say") {
  const ScenarioConfig base = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  const ScenarioConfig v = parse_scenario(scenario("sensitivity/high_heat.yaml"));
  const auto diff = config_diff(base, v);
  REQUIRE(diff.size() == 3);
  CHECK(diff[0] == "dac.gas_2050");
  CHECK(diff[1] == "description");
  CHECK(diff[2] == "name");
}

TEST_CASE("config hash ignores where the data lives but not what it holds") {
  const ScenarioConfig a = parse_scenario(scenario("netzero2060_lowdac.yaml"));
  ScenarioConfig b = a;
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "nzsim_hash";
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(a.data.storage, dir / a.data.storage.filename(),
                             std::filesystem::copy_options::overwrite_existing);
  b.data.storage = dir / a.data.storage.filename();
  CHECK(config_hash(a) == config_hash(b));
  std::ofstream(b.data.storage, std::ios::app) << "# changed\n";
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hash_hex(0x1234).size() == 16);
}
