#pragma once

// End-to-end scenarios (voltage -> strain -> spectrum -> routing -> detectors)
// and the anchor report built from their summaries.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "strainsim/config.hpp"
#include "strainsim/errors.hpp"

namespace strainsim::scenario {

/// A computed value checked against a tolerance band. Open ends are +/- infinity.
struct Anchor {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string unit;
  bool pass = false;
};

Anchor make_anchor(std::string name, double value, double lo, double hi, std::string unit);

struct ScenarioResult {
  std::string name;
  nlohmann::json input;               // scenario parameters after defaults, plus the seed
  std::vector<std::string> manifest;  // file names relative to out_dir
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Anchor> anchors;
  std::filesystem::path out_dir;

  bool passed() const;
};

/// A module error re-raised with the scenario name prepended; keeps the original kind.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& scenario, const Error& cause)
      : Error(cause.kind(), "scenario " + scenario + ": " + cause.what()) {}
};

const std::vector<std::string>& scenario_names();

/// Runs one scenario and writes its CSV curves plus summary.json into out_root/<name>.
/// The directory is staged next to the target and renamed into place when complete.
/// `seed` overrides settings.seed. Unknown names throw UsageError.
ScenarioResult run_scenario(std::string_view name, const config::DeviceConfig& config,
                            const std::filesystem::path& out_root, std::optional<std::uint64_t> seed = std::nullopt);

nlohmann::json to_json(const ScenarioResult& result);
ScenarioResult result_from_json(const nlohmann::json& doc);

/// Every summary.json below `dir`, in path order.
std::vector<ScenarioResult> load_results(const std::filesystem::path& dir);

struct Report {
  nlohmann::json document;
  std::string table;
};

/// Throws UsageError for an empty input.
Report emit_report(std::span<const ScenarioResult> results);

}  // namespace strainsim::scenario
