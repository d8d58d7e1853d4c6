#include <doctest.h>

#include <fstream>

#include "strainsim/config.hpp"
#include "strainsim/errors.hpp"

using namespace strainsim;
using namespace strainsim::config;
using nlohmann::json;

namespace {

json fixture() {
  std::ifstream in(STRAINSIM_TEST_CONFIG);
  return json::parse(in);
}

bool has_pointer(const ConfigError& e, const std::string& ptr) {
  for (const auto& v : e.violations()) {
    if (v.pointer == ptr) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("shipped fixture parses and validates") {
  const auto c = load_config(STRAINSIM_TEST_CONFIG);
  CHECK(c.emitters.size() == 7);
  CHECK(c.actuators.size() == 4);
  CHECK(c.emitter("SnV3").orientation().orientation_class == crystal::OrientationClass::transverse);
  CHECK(c.network.inputs.size() == 4);
  CHECK(std::filesystem::exists(c.data_path("snv1_susceptibility")));
  for (const auto& [id, a] : c.actuators) CHECK_NOTHROW(a.validate());
}

TEST_CASE("serialization round trip") {
  const auto c = load_config(STRAINSIM_TEST_CONFIG);
  const auto back = parse_config(to_json(c), c.base_dir);
  CHECK(to_json(back) == to_json(c));
  CHECK(back.snv == c.snv);
  CHECK(back.actuators == c.actuators);
}

TEST_CASE("every violation is reported with its pointer") {
  json doc = fixture();
  doc["emitters"][0]["actuator"] = "nowhere";
  doc["emitters"][1]["zpf_strain_voigt"] = {1, 2, 3, 4, 5, 6, 7};
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() >= 2);
    CHECK(has_pointer(e, "/emitters/0/actuator"));
    CHECK(has_pointer(e, "/emitters/1/zpf_strain_voigt"));
    CHECK(std::string(e.what()).find("SnV1") != std::string::npos);
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("version mismatch") {
  json doc = fixture();
  doc["version"] = 99;
  CHECK_THROWS_AS(parse_config(doc), VersionError);
}

TEST_CASE("dotted overrides") {
  json doc = fixture();
  apply_override(doc, "spin.g_sm_hz=600");
  apply_override(doc, "emitters.0.depth_nm=90");
  apply_override(doc, "settings.modulation_index_convention=sqrt-n");
  const auto c = parse_config(doc);
  CHECK(c.spin.g_sm_hz == 600.0);
  CHECK(c.emitters[0].depth_nm == 90.0);
  CHECK(c.settings.modulation_index_convention == spectroscopy::ModulationConvention::sqrt_n);
  CHECK_THROWS_AS(apply_override(doc, "no-equals-sign"), UsageError);
  CHECK_THROWS_AS(apply_override(doc, "version.x=1"), UsageError);
}

TEST_CASE("unit conversion at the boundary") {
  const auto c = load_config(STRAINSIM_TEST_CONFIG);
  const auto& modes = c.actuators.at("strainems-2").site("SnV2").modes;
  CHECK(modes.front().frequency_hz == doctest::Approx(10e6));
  CHECK(mhz_to_ghz(1000.0) == 1.0);
}
