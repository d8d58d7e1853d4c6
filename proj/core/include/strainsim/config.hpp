#pragma once

// Device configuration: JSON loading with full violation reporting, dotted-path
// overrides and serialization back to JSON.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "strainsim/crystal_frames.hpp"
#include "strainsim/nems_actuator.hpp"
#include "strainsim/photonics.hpp"
#include "strainsim/snv_hamiltonian.hpp"
#include "strainsim/spectroscopy.hpp"

namespace strainsim::config {

inline constexpr int kConfigVersion = 1;
inline constexpr std::string_view kConfigEnvVar = "STRAINSIM_CONFIG";

struct EmitterRecord {
  std::string id;
  std::string actuator;
  crystal::CrystalDirection dipole;
  std::optional<crystal::CrystalDirection> x_axis;
  double depth_nm = 0.0;
  double depth_straggle_nm = 0.0;
  std::array<double, 6> zpf_strain_voigt{};  // emitter frame

  crystal::SnVOrientation orientation() const;
  crystal::StrainTensor zpf_strain() const;
};

struct Settings {
  spectroscopy::ModulationConvention modulation_index_convention = spectroscopy::ModulationConvention::as_printed;
  snv::PrestrainReading prestrain_reading = snv::PrestrainReading::eg_magnitude;
  std::uint64_t seed = 1;
  double poisson_ratio = 0.0;
};

struct SpinSettings {
  std::string emitter;
  double prestrain_ghz = 865.0;
  std::array<double, 3> field_tesla{0.022, 0.0, 0.0};  // emitter frame
  double g_sm_hz = 512.0;
  double init_fidelity = 0.9;
  double readout_contrast = 1.0;
  double baseline_counts = 0.0;
  double pulse_duration_ns = 150.0;
  double phonon_number = 1.0;
};

struct DeviceConfig {
  int version = kConfigVersion;
  snv::SnVParams snv;
  Settings settings;
  std::vector<EmitterRecord> emitters;
  std::map<std::string, actuator::ActuatorModel, std::less<>> actuators;
  photonics::SwitchNetwork network;
  std::map<std::string, std::array<double, 6>, std::less<>> zpf_fixtures;  // emitter frame, Voigt
  std::map<std::string, std::string, std::less<>> data_files;              // relative to base_dir
  SpinSettings spin;
  nlohmann::json scenarios = nlohmann::json::object();
  std::filesystem::path base_dir;

  const EmitterRecord& emitter(std::string_view id) const;
  std::filesystem::path data_path(std::string_view key) const;
};

/// Throws VersionError on a version mismatch and ConfigError listing every schema violation.
DeviceConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
DeviceConfig load_config(const std::filesystem::path& path);
/// Applies each "key=value" override to the raw document before validation.
DeviceConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides);
nlohmann::json read_config_json(const std::filesystem::path& path);

nlohmann::json to_json(const DeviceConfig& config);

/// "a.b.0.c=value"; the value is parsed as JSON when possible, otherwise taken as a string.
/// Throws UsageError for malformed assignments or paths that cross a scalar.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// $STRAINSIM_CONFIG when set, otherwise the shipped default fixture.
std::filesystem::path default_config_path();

/// Convert frequency fields at the config boundary.
inline double mhz_to_hz(double mhz) { return mhz * 1e6; }
inline double mhz_to_ghz(double mhz) { return mhz * 1e-3; }

}  // namespace strainsim::config
