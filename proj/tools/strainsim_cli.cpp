// strainsim: run scenarios, fit spectra, and summarize results.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "strainsim/config.hpp"
#include "strainsim/errors.hpp"
#include "strainsim/scenario.hpp"
#include "strainsim/spectroscopy.hpp"

namespace {

using nlohmann::json;
namespace sp = strainsim::spectroscopy;

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

int exit_code(strainsim::ErrorKind kind) {
  switch (kind) {
    case strainsim::ErrorKind::usage: return kExitUsage;
    case strainsim::ErrorKind::config: return kExitConfig;
    case strainsim::ErrorKind::numerical: return kExitNumerical;
  }
  return 1;
}

struct SimArgs {
  std::string scenario;
  std::string config;
  std::string out = "strainsim-out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  int jobs = 1;
};

int run_sim(const SimArgs& a) {
  const auto path = a.config.empty() ? strainsim::config::default_config_path() : std::filesystem::path(a.config);
  const auto cfg = strainsim::config::load_config(path, a.overrides);

  std::vector<std::string> names;
  if (a.scenario == "all") {
    names = strainsim::scenario::scenario_names();
  } else {
    names.push_back(a.scenario);
  }
  if (a.jobs < 1) throw strainsim::UsageError("--jobs must be at least 1");

  std::vector<std::optional<strainsim::scenario::ScenarioResult>> results(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  {
    std::vector<std::jthread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(a.jobs), names.size());
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < names.size(); i += n_threads) {
          try {
            results[i] = strainsim::scenario::run_scenario(names[i], cfg, a.out, a.seed);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  for (const auto& r : results) {
    std::cout << r->name << ": " << r->manifest.size() << " files in " << r->out_dir.string() << ", anchors "
              << (r->passed() ? "pass" : "FAIL") << '\n';
  }
  return 0;
}

json fit_to_json(const sp::LorentzianFit& f) {
  return {{"center_ghz", f.center},         {"center_sigma_ghz", f.center_sigma},
          {"fwhm_ghz", f.fwhm},             {"fwhm_sigma_ghz", f.fwhm_sigma},
          {"amplitude", f.amplitude},       {"amplitude_sigma", f.amplitude_sigma},
          {"baseline", f.baseline},         {"baseline_sigma", f.baseline_sigma},
          {"residual_norm", f.residual_norm}, {"iterations", f.iterations}};
}

json fit_to_json(const sp::SidebandFit& f) {
  return {{"center_ghz", f.center},     {"center_sigma_ghz", f.center_sigma},
          {"fwhm_ghz", f.fwhm},         {"fwhm_sigma_ghz", f.fwhm_sigma},
          {"beta", f.beta},             {"beta_sigma", f.beta_sigma},
          {"amplitude", f.amplitude},   {"amplitude_sigma", f.amplitude_sigma},
          {"baseline", f.baseline},     {"baseline_sigma", f.baseline_sigma},
          {"omega_d_ghz", f.omega_d},   {"k_max", f.k_max},
          {"residual_norm", f.residual_norm}, {"iterations", f.iterations}};
}

struct FitArgs {
  std::string type;
  std::string in;
  double drive_mhz = 0.0;
  std::optional<double> linewidth_mhz;
  std::optional<double> g_orb_hz;
  std::string convention = "as-printed";
};

int run_fit(const FitArgs& a) {
  const sp::PLESpectrum spec = sp::read_spectrum_csv(a.in);
  json out;
  if (a.type == "lorentzian") {
    out = fit_to_json(sp::fit_lorentzian(spec));
  } else if (a.type == "sideband") {
    if (!(a.drive_mhz > 0.0)) throw strainsim::UsageError("sideband fits need --drive-mhz");
    const auto f = sp::fit_sideband_comb(spec, strainsim::config::mhz_to_ghz(a.drive_mhz));
    out = fit_to_json(f);
    if (a.g_orb_hz) {
      const auto conv = sp::modulation_convention_from_string(a.convention);
      out["phonon_number"] = sp::phonon_number(f.beta, strainsim::config::mhz_to_hz(a.drive_mhz), *a.g_orb_hz, conv);
      out["convention"] = std::string(sp::to_string(conv));
    }
  } else if (a.type == "delta-ac") {
    std::optional<double> gamma;
    if (a.linewidth_mhz) gamma = strainsim::config::mhz_to_ghz(*a.linewidth_mhz);
    const auto d = sp::extract_delta_ac(spec, gamma);
    out = {{"delta_ac_ghz", d.value_ghz}, {"sigma_ghz", d.sigma_ghz}, {"horns_resolved", d.horns_resolved}};
  } else {
    throw strainsim::UsageError("unknown fit type '" + a.type + "' (lorentzian, sideband, delta-ac)");
  }
  out["fit"] = a.type;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_report(const std::string& in, const std::string& json_out) {
  const auto results = strainsim::scenario::load_results(in);
  const auto rep = strainsim::scenario::emit_report(results);
  std::cout << rep.table;
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    f << rep.document.dump(2) << '\n';
    if (!f) throw strainsim::UsageError("cannot write " + json_out);
  }
  return rep.document.at("failed").get<int>() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strainsim: strain-tuned color-center device simulator"};
  app.require_subcommand(1);

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("sim", "run a scenario (or 'all') and write CSV curves plus summary.json");
  sim_cmd->add_option("scenario", sim.scenario, "scenario name or 'all'")->required();
  sim_cmd->add_option("--config", sim.config, "device config (default: $STRAINSIM_CONFIG or the shipped fixture)");
  sim_cmd->add_option("--out", sim.out, "output root directory");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed (overrides settings.seed)");
  sim_cmd->add_option("--set", sim.overrides, "dotted-path override key=value (repeatable)");
  sim_cmd->add_option("--jobs", sim.jobs, "scenarios run in parallel");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a spectrum CSV (detuning_ghz,signal)");
  fit_cmd->add_option("type", fit.type, "lorentzian | sideband | delta-ac")->required();
  fit_cmd->add_option("--in", fit.in, "input CSV")->required();
  fit_cmd->add_option("--drive-mhz", fit.drive_mhz, "drive frequency for sideband fits");
  fit_cmd->add_option("--linewidth-mhz", fit.linewidth_mhz, "reference linewidth for delta-ac");
  fit_cmd->add_option("--g-orb-hz", fit.g_orb_hz, "orbital coupling; adds the phonon number to sideband fits");
  fit_cmd->add_option("--convention", fit.convention, "as-printed | sqrt-n");

  std::string report_in, report_json;
  auto* rep_cmd = app.add_subcommand("report", "tabulate anchors from a directory of scenario results");
  rep_cmd->add_option("--in", report_in, "directory holding scenario outputs")->required();
  rep_cmd->add_option("--json", report_json, "also write the consolidated JSON here");

  app.add_subcommand("list", "print scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim_cmd) return run_sim(sim);
    if (*fit_cmd) return run_fit(fit);
    if (*rep_cmd) return run_report(report_in, report_json);
    for (const auto& n : strainsim::scenario::scenario_names()) std::cout << n << '\n';
    return 0;
  } catch (const strainsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
