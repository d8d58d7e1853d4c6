#include "strainsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "strainsim/crystal_frames.hpp"
#include "strainsim/nems_actuator.hpp"
#include "strainsim/photon_streams.hpp"
#include "strainsim/photonics.hpp"
#include "strainsim/snv_hamiltonian.hpp"
#include "strainsim/spectroscopy.hpp"
#include "strainsim/spin_control.hpp"

namespace strainsim::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Scenario parameters with defaults; type mismatches surface as ConfigError at the parameter's pointer.
class Params {
 public:
  Params(const config::DeviceConfig& cfg, std::string name) : name_(std::move(name)) {
    if (cfg.scenarios.contains(name_)) src_ = cfg.scenarios.at(name_);
    if (!src_.is_object()) fail("", "scenario parameters must be an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    T v = fallback;
    if (const auto it = src_.find(key); it != src_.end()) {
      try {
        v = it->template get<T>();
      } catch (const json::exception& e) {
        fail("/" + key, e.what());
      }
    }
    echo_[key] = v;
    return v;
  }

  const json& echo() const { return echo_; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::vector<ConfigViolation> v{{"/scenarios/" + name_ + key, msg}};
    throw ConfigError(std::move(v));
  }

 private:
  std::string name_;
  json src_ = json::object();
  json echo_ = json::object();
};

// Collects files in the staging directory.
class Output {
 public:
  Output(fs::path dir, ScenarioResult& result) : dir_(std::move(dir)), result_(result) {}

  std::ofstream open(const std::string& file) {
    std::ofstream out(dir_ / file, std::ios::binary);
    if (!out) throw UsageError("cannot write " + (dir_ / file).string());
    result_.manifest.push_back(file);
    return out;
  }

  void spectrum(const std::string& file, const spectroscopy::PLESpectrum& spec) {
    auto out = open(file);
    spectroscopy::write_spectrum_csv(out, spec);
  }

 private:
  fs::path dir_;
  ScenarioResult& result_;
};

struct Ctx {
  const config::DeviceConfig& cfg;
  Params& p;
  Output& out;
  ScenarioResult& r;
  std::uint64_t seed;

  void anchor(std::string name, double value, double lo, double hi, std::string unit) {
    r.anchors.push_back(make_anchor(std::move(name), value, lo, hi, std::move(unit)));
  }
};

const actuator::ActuatorModel& actuator_for(const config::DeviceConfig& cfg, const config::EmitterRecord& e) {
  return cfg.actuators.at(e.actuator);
}

crystal::StrainTensor to_emitter_frame(const config::EmitterRecord& e, const crystal::StrainTensor& device) {
  return crystal::transform_strain(device, crystal::device_to_snv(e.orientation()));
}

// Half peak-to-peak optical excursion of `site` under v_ac at drive_hz.
double delta_ac_for(const config::DeviceConfig& cfg, const std::string& site, double v_ac, double drive_hz) {
  const auto& e = cfg.emitter(site);
  const double amp = actuator::ac_strain_amplitude(actuator_for(cfg, e), site, v_ac, drive_hz);
  const auto eps = to_emitter_frame(e, crystal::uniaxial_device_strain(amp, cfg.settings.poisson_ratio));
  return snv::delta_ac_ghz(cfg.snv, eps);
}

std::string volt_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gv", v);
  std::string s = buf;
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

struct Triplet {
  std::vector<double> x, y, sigma;
};

[[noreturn]] void bad_fixture(const std::string& what) { throw SpectrumFormatError(what); }

double parse_number(std::string_view field, const std::string& where) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    bad_fixture(where + ": not a finite number");
  }
  return v;
}

// strain,delta_ghz,sigma_ghz with '#' comments.
Triplet read_susceptibility_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad_fixture("cannot open susceptibility fixture " + path.string());
  Triplet t;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    if (!header) {
      if (line.rfind("strain,delta_ghz,sigma_ghz", 0) != 0) bad_fixture(path.string() + ": unexpected header");
      header = true;
      continue;
    }
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      cells.push_back(rest.substr(0, pos));
    }
    cells.push_back(rest);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 3) bad_fixture(where + ": expected 3 columns");
    t.x.push_back(parse_number(cells[0], where));
    t.y.push_back(parse_number(cells[1], where));
    t.sigma.push_back(parse_number(cells[2], where));
  }
  if (!header) bad_fixture(path.string() + ": missing header");
  return t;
}

// ---------------------------------------------------------------------------

void dc_tuning(Ctx& c) {
  const auto sites = c.p.get<std::vector<std::string>>("sites", {"SnV1", "SnV2", "SnV3"});
  const auto high = c.p.get<std::string>("high_strain_site", "SnV1");
  const double v_max = c.p.get<double>("v_max", 60.0);
  const double v_step = c.p.get<double>("v_step", 5.0);
  const auto fixtures = c.p.get<std::map<std::string, std::string>>("susceptibility", {});
  if (!(v_step > 0.0) || !(v_max > 0.0)) c.p.fail("/v_step", "v_max and v_step must be positive");
  const int n_steps = static_cast<int>(std::floor(2.0 * v_max / v_step + 1e-9));

  auto out = c.out.open("dc_tuning.csv");
  out << "site,v_dc,strain_zz,delta_dc_ghz,delta_dc_approx_ghz\n";
  json per_site = json::object();
  for (const auto& site : sites) {
    const auto& e = c.cfg.emitter(site);
    const auto& model = actuator_for(c.cfg, e);
    json s = json::object();
    s["orientation"] = std::string(crystal::to_string(e.orientation().orientation_class));
    for (int i = 0; i <= n_steps; ++i) {
      const double v = -v_max + i * v_step;
      const auto dc = actuator::dc_response(model, site, v, c.cfg.settings.poisson_ratio);
      const auto eps = to_emitter_frame(e, dc.strain);
      const auto shift = snv::delta_dc(c.cfg.snv, eps);
      out << site << ',' << fmt(v) << ',' << fmt(eps.zz()) << ',' << fmt(shift.exact_ghz) << ','
          << fmt(shift.approximate_ghz) << '\n';
    }
    for (double v : {-v_max, v_max}) {
      const auto eps = to_emitter_frame(e, actuator::dc_response(model, site, v, c.cfg.settings.poisson_ratio).strain);
      s[v < 0 ? "delta_dc_neg_ghz" : "delta_dc_pos_ghz"] = snv::delta_dc(c.cfg.snv, eps).exact_ghz;
    }
    per_site[site] = s;
  }
  c.r.summary["sites"] = per_site;

  const auto& he = c.cfg.emitter(high);
  const auto& hm = actuator_for(c.cfg, he);
  const auto eps_hi = to_emitter_frame(he, actuator::dc_response(hm, high, v_max, c.cfg.settings.poisson_ratio).strain);
  const double tuning = std::abs(snv::delta_dc(c.cfg.snv, eps_hi).exact_ghz);
  const double hold = actuator::hold_power_w(hm, v_max);
  c.r.summary["tuning_range_ghz"] = tuning;
  c.r.summary["hold_power_w"] = hold;
  c.anchor("dc_tuning_abs_ghz", tuning, 20.0, kInf, "GHz");
  c.anchor("hold_power_nw", hold * 1e9, -kInf, 1.0, "nW");

  // Measured susceptibilities from the fixture points.
  static const std::map<std::string, std::pair<double, double>> kBands{{"SnV1", {-0.490, 0.075}},
                                                                       {"SnV2", {-0.436, 0.071}}};
  json fits = json::object();
  for (const auto& [site, key] : fixtures) {
    const Triplet t = read_susceptibility_csv(c.cfg.data_path(key));
    const auto fit = spectroscopy::fit_linear(t.x, t.y, t.sigma);
    const double slope = fit.slope / snv::kGhzPerPhz;
    const double sigma = fit.slope_sigma / snv::kGhzPerPhz;
    fits[site] = {{"slope_phz", slope}, {"slope_sigma_phz", sigma}, {"intercept_ghz", fit.intercept}};
    if (const auto b = kBands.find(site); b != kBands.end()) {
      c.anchor("susceptibility_" + site + "_phz", slope, b->second.first - b->second.second,
               b->second.first + b->second.second, "PHz/strain");
    }
  }
  c.r.summary["susceptibility"] = fits;
}

void ac_broadening(Ctx& c) {
  const auto site = c.p.get<std::string>("site", "SnV2");
  const double v_ac = c.p.get<double>("v_ac", 0.25);
  const auto drives = c.p.get<std::vector<double>>("drive_mhz", {1.0, 10.0});
  const double gamma = config::mhz_to_ghz(c.p.get<double>("linewidth_mhz", 120.0));
  const double span = c.p.get<double>("span_ghz", 4.0);
  const int points = c.p.get<int>("points", 1601);
  const auto grid = spectroscopy::linspace(-span / 2.0, span / 2.0, points);

  json rows = json::array();
  for (double f_mhz : drives) {
    const double d = delta_ac_for(c.cfg, site, v_ac, config::mhz_to_hz(f_mhz));
    const auto spec = spectroscopy::synth_slow_modulation(0.0, gamma, d, grid);
    const auto est = spectroscopy::extract_delta_ac(spec, gamma);
    c.out.spectrum("ple_" + fmt(f_mhz) + "mhz.csv", spec);
    rows.push_back({{"drive_mhz", f_mhz},
                    {"delta_ac_ghz", d},
                    {"recovered_ghz", est.value_ghz},
                    {"recovered_sigma_ghz", est.sigma_ghz},
                    {"horns_resolved", est.horns_resolved}});
  }
  c.r.summary["drives"] = rows;
}

void resonance_enhancement(Ctx& c) {
  const auto site = c.p.get<std::string>("site", "SnV2");
  const double v_ac = c.p.get<double>("v_ac", 0.25);
  const double on = c.p.get<double>("on_mhz", 10.0);
  const double off = c.p.get<double>("off_mhz", 1.0);
  const auto sweep = c.p.get<std::vector<double>>("sweep_mhz", {0.5, 20.0});
  const int n = c.p.get<int>("sweep_points", 391);
  if (sweep.size() != 2) c.p.fail("/sweep_mhz", "expected [lo, hi]");

  const auto& e = c.cfg.emitter(site);
  const auto& model = actuator_for(c.cfg, e);
  auto out = c.out.open("resonance_sweep.csv");
  out << "drive_mhz,strain_amplitude,delta_ac_ghz\n";
  for (double f : spectroscopy::linspace(sweep[0], sweep[1], n)) {
    const double hz = config::mhz_to_hz(f);
    out << fmt(f) << ',' << fmt(actuator::ac_strain_amplitude(model, site, v_ac, hz)) << ','
        << fmt(delta_ac_for(c.cfg, site, v_ac, hz)) << '\n';
  }
  const double d_on = delta_ac_for(c.cfg, site, v_ac, config::mhz_to_hz(on));
  const double d_off = delta_ac_for(c.cfg, site, v_ac, config::mhz_to_hz(off));
  c.r.summary["delta_ac_on_ghz"] = d_on;
  c.r.summary["delta_ac_off_ghz"] = d_off;
  c.r.summary["enhancement"] = d_on / d_off;
  c.anchor("enhancement_ratio", d_on / d_off, 15.0, 25.0, "");
  c.anchor("delta_ac_on_ghz", d_on, 1.9 * 0.9, 1.9 * 1.1, "GHz");
}

void sideband_comb(Ctx& c) {
  const auto site = c.p.get<std::string>("site", "SnV2");
  const double f_mhz = c.p.get<double>("drive_mhz", 1000.0);
  const auto volts = c.p.get<std::vector<double>>("v_ac", {0.1, 0.2, 0.3, 0.4, 0.5});
  const double gamma = config::mhz_to_ghz(c.p.get<double>("linewidth_mhz", 120.0));
  const int points = c.p.get<int>("points", 2401);
  const double w = config::mhz_to_ghz(f_mhz);

  auto table = c.out.open("sideband_fits.csv");
  table << "v_ac,beta_model,beta_fit,beta_sigma,weight_sum\n";
  double worst = 0.0;
  double min_weight = 1.0;
  json rows = json::array();
  for (double v : volts) {
    const double beta = delta_ac_for(c.cfg, site, v, config::mhz_to_hz(f_mhz)) / w;
    const int k_max = spectroscopy::default_k_max(beta);
    const double half = (k_max + 2) * w;
    const auto grid = spectroscopy::linspace(-half, half, points);
    const auto spec = spectroscopy::synth_sidebands(0.0, gamma, beta, w, std::nullopt, grid);
    const auto fit = spectroscopy::fit_sideband_comb(spec, w);
    double weights = 0.0;
    for (int k = -k_max; k <= k_max; ++k) weights += std::pow(spectroscopy::bessel_j(k, beta), 2);
    c.out.spectrum("sideband_" + volt_tag(v) + ".csv", spec);
    table << fmt(v) << ',' << fmt(beta) << ',' << fmt(fit.beta) << ',' << fmt(fit.beta_sigma) << ',' << fmt(weights)
          << '\n';
    worst = std::max(worst, std::abs(fit.beta - beta));
    min_weight = std::min(min_weight, weights);
    rows.push_back({{"v_ac", v}, {"beta_model", beta}, {"beta_fit", fit.beta}, {"iterations", fit.iterations}});
  }
  c.r.summary["fits"] = rows;
  c.anchor("beta_closure_abs", worst, 0.0, 1e-4, "");
  c.anchor("bessel_weight_sum", min_weight, 0.999, kInf, "");
}

void phonon_number(Ctx& c) {
  const auto site = c.p.get<std::string>("site", "SnV2");
  const double f_mhz = c.p.get<double>("drive_mhz", 1000.0);
  const double v_ac = c.p.get<double>("v_ac", 0.5);
  const double gamma = config::mhz_to_ghz(c.p.get<double>("linewidth_mhz", 120.0));
  const auto fixture = c.p.get<std::string>("zpf_fixture", "transverse_max");
  const auto it = c.cfg.zpf_fixtures.find(fixture);
  if (it == c.cfg.zpf_fixtures.end()) c.p.fail("/zpf_fixture", "no zero-point fixture '" + fixture + "'");

  const auto& e = c.cfg.emitter(site);
  const auto zpf = crystal::StrainTensor::from_voigt(it->second, e.orientation().frame());
  const double g_orb = snv::g_orb_hz(c.cfg.snv, zpf);
  const double w = config::mhz_to_ghz(f_mhz);
  const double beta_model = delta_ac_for(c.cfg, site, v_ac, config::mhz_to_hz(f_mhz)) / w;
  const int k_max = spectroscopy::default_k_max(beta_model);
  const auto grid = spectroscopy::linspace(-(k_max + 2) * w, (k_max + 2) * w, 2401);
  const auto spec = spectroscopy::synth_sidebands(0.0, gamma, beta_model, w, std::nullopt, grid);
  c.out.spectrum("sideband_spectrum.csv", spec);
  const auto fit = spectroscopy::fit_sideband_comb(spec, w);
  const auto conv = c.cfg.settings.modulation_index_convention;
  const double n = spectroscopy::phonon_number(fit.beta, config::mhz_to_hz(f_mhz), g_orb, conv);
  const double reference = spectroscopy::phonon_number(1.0, 1e9, 1e4, conv);

  c.r.summary["g_orb_hz"] = g_orb;
  c.r.summary["beta_fit"] = fit.beta;
  c.r.summary["beta_sigma"] = fit.beta_sigma;
  c.r.summary["phonon_number"] = n;
  c.r.summary["convention"] = std::string(spectroscopy::to_string(conv));
  c.anchor("phonon_number_reference", reference, 1e5 * (1 - 1e-9), 1e5 * (1 + 1e-9), "");
  c.anchor("phonon_number_order", std::log10(n), 4.5, 5.5, "log10");
}

snv::SnVParams spin_params(const config::DeviceConfig& cfg, double prestrain_ghz) {
  return cfg.snv.with_prestrain(prestrain_ghz, cfg.settings.prestrain_reading);
}

Eigen::Vector3d field_of(const config::SpinSettings& s) {
  return {s.field_tesla[0], s.field_tesla[1], s.field_tesla[2]};
}

void spin_odmr(Ctx& c) {
  const auto sweep = c.p.get<std::vector<double>>("sweep_mhz", {350.0, 1050.0});
  const int points = c.p.get<int>("points", 701);
  if (sweep.size() != 2) c.p.fail("/sweep_mhz", "expected [lo, hi]");
  const auto& s = c.cfg.spin;
  const auto conv = c.cfg.settings.modulation_index_convention;
  const auto params = spin_params(c.cfg, s.prestrain_ghz);
  const double splitting = snv::spin_transition_frequency_ghz(params, field_of(s));

  spin::SpinQubit q;
  q.splitting_ghz = splitting;
  q.g_sm_hz = s.g_sm_hz;
  q.init_fidelity = s.init_fidelity;
  q.readout_contrast = s.readout_contrast;
  q.baseline_counts = s.baseline_counts;
  spin::AcousticPulse pulse{0.0, s.phonon_number, s.pulse_duration_ns * 1e-9};

  std::vector<double> omegas;
  for (double f : spectroscopy::linspace(sweep[0], sweep[1], points)) omegas.push_back(config::mhz_to_hz(f));
  const auto odmr = spin::simulate_odmr_sweep(q, pulse, omegas, conv);
  auto out = c.out.open("odmr.csv");
  out << "omega_mhz,counts\n";
  std::size_t best = 0;
  for (std::size_t i = 0; i < odmr.size(); ++i) {
    out << fmt(odmr[i].omega_hz * 1e-6) << ',' << fmt(odmr[i].counts) << '\n';
    if (odmr[i].counts > odmr[best].counts) best = i;
  }
  const double step_mhz = (sweep[1] - sweep[0]) / (points - 1);
  const double peak_mhz = odmr[best].omega_hz * 1e-6;

  // Pump, resonant pulse, readout.
  pulse.omega_d_hz = splitting * snv::kHzPerGhz;
  const std::vector<spin::SequenceStep> seq{
      {spin::StepKind::pump, {}}, {spin::StepKind::acoustic, pulse}, {spin::StepKind::readout, {}}};
  const auto res = spin::simulate_pulse_sequence(q, seq, conv);
  auto trace = c.out.open("sequence.csv");
  trace << "step,kind,p1,p2\n";
  static const char* kKinds[] = {"pump", "acoustic", "readout"};
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    trace << i << ',' << kKinds[static_cast<int>(seq[i].kind)] << ',' << fmt(res.trace[i].p1) << ','
          << fmt(res.trace[i].p2) << '\n';
  }

  const double g_model = snv::g_sm_hz(params, c.cfg.emitter(s.emitter).zpf_strain(), field_of(s));
  const double rabi_ref = spin::acoustic_rabi_frequency(512.0, 1e5, spectroscopy::ModulationConvention::as_printed);
  c.r.summary["splitting_mhz"] = splitting * 1e3;
  c.r.summary["peak_mhz"] = peak_mhz;
  c.r.summary["g_sm_configured_hz"] = s.g_sm_hz;
  c.r.summary["g_sm_model_hz"] = g_model;
  c.r.summary["readout_counts"] = res.readout_counts;
  c.anchor("odmr_peak_offset_mhz", peak_mhz - splitting * 1e3, -step_mhz, step_mhz, "MHz");
  c.anchor("spin_splitting_mhz", splitting * 1e3, 500.0, 650.0, "MHz");
  c.anchor("rabi_reference_mhz", rabi_ref * 1e-6, 100.0, kInf, "MHz");
}

void gsm_sweep(Ctx& c) {
  const double b_min = c.p.get<double>("b_min_t", 0.01);
  const double b_max = c.p.get<double>("b_max_t", 2.0);
  const int points = c.p.get<int>("points", 200);
  const auto& s = c.cfg.spin;
  const auto zpf = c.cfg.emitter(s.emitter).zpf_strain();
  const double g_orb = snv::g_orb_hz(c.cfg.snv, zpf);
  const auto grid = spectroscopy::linspace(b_min, b_max, points);

  auto out = c.out.open("gsm_sweep.csv");
  out << "b_tesla,prestrain_ghz,g_sm_hz,degenerate\n";
  struct Series {
    std::vector<double> b, g;
    int degenerate = 0;
  };
  auto run = [&](double prestrain) {
    Series ser;
    const auto params = spin_params(c.cfg, prestrain);
    for (double b : grid) {
      double g = 0.0;
      bool degenerate = false;
      try {
        g = snv::g_sm_hz(params, zpf, Eigen::Vector3d(b, 0.0, 0.0));
      } catch (const DegenerateQubitError&) {
        degenerate = true;
        ++ser.degenerate;
      }
      out << fmt(b) << ',' << fmt(prestrain) << ',' << (degenerate ? std::string("nan") : fmt(g)) << ','
          << (degenerate ? 1 : 0) << '\n';
      if (!degenerate) {
        ser.b.push_back(b);
        ser.g.push_back(g);
      }
    }
    return ser;
  };
  const Series pre = run(s.prestrain_ghz);
  const Series zero = run(0.0);

  double g_anchor = std::numeric_limits<double>::quiet_NaN();
  try {
    g_anchor = snv::g_sm_hz(spin_params(c.cfg, s.prestrain_ghz), zpf, field_of(s));
  } catch (const DegenerateQubitError&) {
  }
  c.r.summary["g_orb_hz"] = g_orb;
  c.r.summary["g_sm_at_field_hz"] = g_anchor;
  c.r.summary["prestrain_degenerate_points"] = pre.degenerate;
  c.r.summary["zero_prestrain_degenerate_points"] = zero.degenerate;
  c.anchor("g_sm_at_field_hz", g_anchor, 256.0, 768.0, "Hz");

  double peak = std::numeric_limits<double>::quiet_NaN();
  double peak_b = std::numeric_limits<double>::quiet_NaN();
  bool interior = false;
  if (!pre.g.empty()) {
    const auto it = std::max_element(pre.g.begin(), pre.g.end());
    const auto i = static_cast<std::size_t>(it - pre.g.begin());
    peak = *it;
    peak_b = pre.b[i];
    interior = i > 0 && i + 1 < pre.g.size();
  }
  c.r.summary["g_sm_peak_hz"] = peak;
  c.r.summary["g_sm_peak_field_t"] = peak_b;
  c.r.summary["g_sm_peak_interior"] = interior;
  c.anchor("g_sm_peak_interior", interior ? 1.0 : 0.0, 1.0, 1.0, "");
  c.anchor("g_sm_peak_hz", peak, 2000.0, 6000.0, "Hz");
  c.anchor("g_sm_peak_field_t", peak_b, 0.2, 0.4, "T");

  bool monotone = zero.degenerate == 0 && !zero.g.empty();
  double zero_max = 0.0;
  for (std::size_t i = 0; i < zero.g.size(); ++i) {
    if (i > 0 && zero.g[i] < zero.g[i - 1]) monotone = false;
    zero_max = std::max(zero_max, zero.g[i]);
  }
  c.r.summary["zero_prestrain_monotone"] = monotone;
  c.anchor("zero_prestrain_monotone", monotone ? 1.0 : 0.0, 1.0, 1.0, "");
  c.anchor("zero_prestrain_degenerate_points", zero.degenerate, 0.0, 0.0, "");
  c.anchor("zero_prestrain_max_over_g_orb", zero.g.empty() ? std::numeric_limits<double>::quiet_NaN() : zero_max / g_orb,
           -kInf, 1.0, "");
}

void power_budget(Ctx& c) {
  const auto act = c.p.get<std::string>("actuator", "strainems-2");
  const auto cases = c.p.get<json>("cases", json::array({{{"v_ac", 0.25}, {"drive_mhz", 10.0}},
                                                          {{"v_ac", 0.5}, {"drive_mhz", 2500.0}}}));
  const double hold_v = c.p.get<double>("hold_v", 60.0);
  const auto it = c.cfg.actuators.find(act);
  if (it == c.cfg.actuators.end()) c.p.fail("/actuator", "no actuator '" + act + "'");
  const auto& model = it->second;

  auto out = c.out.open("power.csv");
  out << "v_ac,drive_mhz,dissipated_w,switching_energy_j\n";
  json rows = json::array();
  for (const auto& cs : cases) {
    double v = 0.0, f = 0.0;
    try {
      v = cs.at("v_ac").get<double>();
      f = cs.at("drive_mhz").get<double>();
    } catch (const json::exception& e) {
      c.p.fail("/cases", e.what());
    }
    const double p = actuator::dissipated_power_w(model, v, config::mhz_to_hz(f));
    const double en = actuator::switching_energy_j(model, v);
    out << fmt(v) << ',' << fmt(f) << ',' << fmt(p) << ',' << fmt(en) << '\n';
    rows.push_back({{"v_ac", v}, {"drive_mhz", f}, {"dissipated_w", p}, {"switching_energy_j", en}});
  }
  const double hold = actuator::hold_power_w(model, hold_v);
  c.r.summary["cases"] = rows;
  c.r.summary["hold_power_w"] = hold;
  const double p_low = actuator::dissipated_power_w(model, 0.25, 10e6);
  const double p_high = actuator::dissipated_power_w(model, 0.5, 2.5e9);
  c.anchor("dissipated_0p25v_10mhz_nw", p_low * 1e9, 0.4 * 0.8, 0.4 * 1.2, "nW");
  c.anchor("dissipated_0p5v_2p5ghz_uw", p_high * 1e6, -kInf, 0.5, "uW");
  c.anchor("hold_power_nw", hold * 1e9, -kInf, 1.0, "nW");
}

struct DcpsSlot {
  std::string element;
  std::string drop;
};

// The dCPS element feeding `channel` and its drop output, found from the edge list.
DcpsSlot slot_for(const photonics::SwitchNetwork& net, const std::string& channel) {
  std::string elem;
  for (const auto& e : net.edges) {
    if (e.from == channel) elem = e.to.substr(0, e.to.find('.'));
  }
  if (elem.empty()) throw TopologyError("input " + channel + " is not connected");
  for (const auto& e : net.edges) {
    if (e.from.rfind(elem + ".", 0) == 0 &&
        std::find(net.outputs.begin(), net.outputs.end(), e.to) != net.outputs.end()) {
      return {elem, e.to};
    }
  }
  throw TopologyError("element " + elem + " has no drop output");
}

// Sets the dCPS phases so `channel` leaves its element towards the final MZI.
double route_channel(photonics::SwitchNetwork& net, const std::string& channel) {
  const DcpsSlot slot = slot_for(net, channel);
  photonics::ExtinctionOptions opt;
  for (const auto& el : net.elements) {
    if (el.name == slot.element) opt.phase_keys = el.phase_keys();
  }
  const auto ext = photonics::optimize_extinction(net, slot.drop, channel, opt);
  for (const auto& [k, v] : ext.phases) net.phases[k] = v;
  return ext.extinction_db;
}

void route_and_switch(Ctx& c) {
  const auto target = c.p.get<std::string>("target_output", "A");
  const auto sb_site = c.p.get<std::string>("sideband_site", "CC4");
  const auto sb_channel = c.p.get<std::string>("sideband_channel", "ch4");
  const double f_mhz = c.p.get<double>("drive_mhz", 1000.0);
  const auto volts = c.p.get<std::vector<double>>("v_ac", {0.75, 1.2});
  const double gamma = config::mhz_to_ghz(c.p.get<double>("linewidth_mhz", 120.0));
  const int points = c.p.get<int>("points", 1601);

  photonics::SwitchNetwork net = c.cfg.network;
  net.validate();
  net.input_index(sb_channel);
  const std::string other = target == "A" ? "B" : "A";

  auto routing = c.out.open("routing.csv");
  routing << "channel,output,power,dcps_extinction_db\n";
  json chans = json::object();
  double worst_ext = kInf;
  std::map<std::string, double> delivered;
  for (const auto& ch : net.inputs) {
    photonics::SwitchNetwork n = net;
    const double ext = route_channel(n, ch);
    photonics::ExtinctionOptions fo;
    fo.phase_keys = {"f.theta"};
    const auto fin = photonics::optimize_extinction(n, other, ch, fo);
    for (const auto& [k, v] : fin.phases) n.phases[k] = v;
    const Eigen::MatrixXcd t = n.transfer();
    const auto col = static_cast<Eigen::Index>(n.input_index(ch));
    for (std::size_t o = 0; o < n.outputs.size(); ++o) {
      routing << ch << ',' << n.outputs[o] << ',' << fmt(std::norm(t(static_cast<Eigen::Index>(o), col))) << ','
              << fmt(ext) << '\n';
    }
    delivered[ch] = std::norm(t(static_cast<Eigen::Index>(n.output_index(target)), col));
    chans[ch] = {{"dcps_extinction_db", ext}, {"delivered", delivered[ch]}};
    worst_ext = std::min(worst_ext, ext);
  }
  c.r.summary["channels"] = chans;
  c.anchor("switch_extinction_min_db", worst_ext, 25.0, kInf, "dB");

  // Element level: cross-port null of each dCPS against a single MZI built from its first coupler pair.
  double dcps_min = kInf;
  double single_db = 0.0;
  for (const auto& el : net.elements) {
    if (el.kind != photonics::ElementKind::dcps) continue;
    const photonics::Element dual{"m", photonics::ElementKind::dcps, el.ratios};
    const double db =
        photonics::optimize_extinction(photonics::single_element_network(dual), "out1", "in0").extinction_db;
    const photonics::Element single{"m", photonics::ElementKind::mzi, {el.ratios[0], el.ratios[1]}};
    const double sdb =
        photonics::optimize_extinction(photonics::single_element_network(single), "out1", "in0").extinction_db;
    c.r.summary["elements"][el.name] = {{"dcps_cross_db", db}, {"single_mzi_cross_db", sdb}};
    if (db < dcps_min) {
      dcps_min = db;
      single_db = sdb;
    }
  }
  const double dual_db = dcps_min;
  c.anchor("dcps_cross_extinction_min_db", dual_db, 40.0, kInf, "dB");
  c.anchor("dcps_minus_single_db", dual_db - single_db, 0.0, kInf, "dB");

  // Sideband spectra from the modulated channel as seen at the target output.
  const auto& e = c.cfg.emitter(sb_site);
  const double w = config::mhz_to_ghz(f_mhz);
  const double dc_max = snv::delta_dc(
      c.cfg.snv, to_emitter_frame(e, actuator::dc_response(actuator_for(c.cfg, e), sb_site, 60.0,
                                                           c.cfg.settings.poisson_ratio).strain)).exact_ghz;
  c.r.summary["sideband_site_delta_dc_60v_ghz"] = dc_max;
  json sbs = json::array();
  for (double v : volts) {
    const double beta = delta_ac_for(c.cfg, sb_site, v, config::mhz_to_hz(f_mhz)) / w;
    const auto grid = spectroscopy::linspace(-4.0 * w, 4.0 * w, points);
    auto spec = spectroscopy::synth_sidebands(0.0, gamma, beta, w, std::nullopt, grid);
    const double scale = delivered.at(sb_channel);
    for (double& s : spec.signal) s *= scale;
    c.out.spectrum("route_sideband_" + volt_tag(v) + ".csv", spec);
    const double j0 = std::pow(spectroscopy::bessel_j(0, beta), 2);
    const double j1 = std::pow(spectroscopy::bessel_j(1, beta), 2);
    const double j2 = std::pow(spectroscopy::bessel_j(2, beta), 2);
    sbs.push_back({{"v_ac", v}, {"beta", beta}, {"weight_k0", j0}, {"weight_k1", j1}, {"weight_k2", j2}});
  }
  c.r.summary["sidebands"] = sbs;
}

void g2(Ctx& c) {
  const double duration = c.p.get<double>("duration_s", 1.0);
  const double bin_ns = c.p.get<double>("bin_ns", 1.0);
  const double range_ns = c.p.get<double>("tau_range_ns", 10000.0);
  const double dead_ns = c.p.get<double>("dead_time_ns", 50.0);
  const bool write_records = c.p.get<bool>("write_records", false);
  const auto sources_json = c.p.get<json>("sources", json::array());
  if (!sources_json.is_array() || sources_json.empty()) c.p.fail("/sources", "need at least one source");

  json rows = json::array();
  for (std::size_t i = 0; i < sources_json.size(); ++i) {
    photonics::EmitterSource src;
    try {
      const auto& sj = sources_json[i];
      src.channel = sj.at("channel").get<std::string>();
      src.lifetime_ns = sj.value("lifetime_ns", 5.0);
      src.signal_rate = sj.at("signal_rate").get<double>();
      src.background_rate = sj.at("background_rate").get<double>();
    } catch (const json::exception& e) {
      c.p.fail("/sources/" + std::to_string(i), e.what());
    }
    // Route this channel through its dCPS, then split 50:50 at the final MZI.
    photonics::SwitchNetwork net = c.cfg.network;
    route_channel(net, src.channel);
    net.phases["f.theta"] = std::numbers::pi / 2.0;

    const auto records = photonics::simulate_photon_streams({src}, net, duration, c.seed + i,
                                                            photonics::DetectorModel{dead_ns * 1e-9});
    const auto& a = records[net.output_index("A")];
    const auto& b = records[net.output_index("B")];
    photonics::G2Options opt;
    opt.bin_width_s = bin_ns * 1e-9;
    opt.tau_range_s = range_ns * 1e-9;
    opt.plateau_min_s = range_ns * 0.5e-9;
    opt.plateau_max_s = range_ns * 1e-9;
    const auto h = photonics::g2_histogram(a, b, opt);
    const auto z = photonics::g2_zero(h);
    const double expected = photonics::g2_zero_expected(src.signal_rate, src.background_rate);
    {
      auto out = c.out.open("g2_" + src.channel + ".csv");
      photonics::write_histogram_csv(out, h);
    }
    if (write_records) {
      auto out = c.out.open("photons_" + src.channel + ".csv");
      photonics::write_records_csv(out, records);
    }
    const double zscore = (z.value - expected) / z.stderr_;
    rows.push_back({{"channel", src.channel},
                    {"g2_zero", z.value},
                    {"stderr", z.stderr_},
                    {"expected", expected},
                    {"counts_A", a.timestamps_s.size()},
                    {"counts_B", b.timestamps_s.size()}});
    c.anchor("g2_zscore_" + src.channel, zscore, -3.0, 3.0, "sigma");
  }
  c.r.summary["sources"] = rows;
}

using Runner = void (*)(Ctx&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"dc-tuning", &dc_tuning},
      {"ac-broadening", &ac_broadening},
      {"resonance-enhancement", &resonance_enhancement},
      {"sideband-comb", &sideband_comb},
      {"phonon-number", &phonon_number},
      {"spin-odmr", &spin_odmr},
      {"gsm-sweep", &gsm_sweep},
      {"power-budget", &power_budget},
      {"route-and-switch", &route_and_switch},
      {"g2", &g2},
  };
  return r;
}

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double unbound(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

}  // namespace

Anchor make_anchor(std::string name, double value, double lo, double hi, std::string unit) {
  Anchor a{std::move(name), value, lo, hi, std::move(unit), false};
  a.pass = std::isfinite(value) && value >= lo && value <= hi;
  return a;
}

bool ScenarioResult::passed() const {
  return std::all_of(anchors.begin(), anchors.end(), [](const Anchor& a) { return a.pass; });
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

ScenarioResult run_scenario(std::string_view name, const config::DeviceConfig& cfg, const fs::path& out_root,
                            std::optional<std::uint64_t> seed) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == name; });
  if (it == reg.end()) throw UsageError("unknown scenario '" + std::string(name) + "'");

  ScenarioResult r;
  r.name = it->first;
  r.out_dir = out_root / r.name;
  const fs::path stage = out_root / ("." + r.name + ".partial");
  fs::create_directories(out_root);
  fs::remove_all(stage);
  fs::create_directories(stage);

  Params params(cfg, r.name);
  Output out(stage, r);
  Ctx ctx{cfg, params, out, r, seed.value_or(cfg.settings.seed)};
  try {
    it->second(ctx);
    r.input = params.echo();
    r.input["seed"] = ctx.seed;
    {
      json doc = to_json(r);
      doc["manifest"].push_back("summary.json");
      std::ofstream js(stage / "summary.json", std::ios::binary);
      js << doc.dump(2) << '\n';
      if (!js) throw UsageError("cannot write " + (stage / "summary.json").string());
    }
    r.manifest.push_back("summary.json");
  } catch (const Error& e) {
    fs::remove_all(stage);
    if (dynamic_cast<const ScenarioError*>(&e)) throw;
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) throw *ce;
    throw ScenarioError(r.name, e);
  } catch (...) {
    fs::remove_all(stage);
    throw;
  }
  fs::remove_all(r.out_dir);
  fs::rename(stage, r.out_dir);
  return r;
}

json to_json(const ScenarioResult& r) {
  json anchors = json::array();
  for (const auto& a : r.anchors) {
    anchors.push_back({{"name", a.name},
                       {"value", std::isfinite(a.value) ? json(a.value) : json(nullptr)},
                       {"lo", bound(a.lo)},
                       {"hi", bound(a.hi)},
                       {"unit", a.unit},
                       {"pass", a.pass}});
  }
  return {{"scenario", r.name},
          {"input", r.input},
          {"manifest", r.manifest},
          {"summary", r.summary},
          {"anchors", anchors}};
}

ScenarioResult result_from_json(const json& doc) {
  ScenarioResult r;
  try {
    r.name = doc.at("scenario").get<std::string>();
    r.input = doc.value("input", json::object());
    r.manifest = doc.value("manifest", std::vector<std::string>{});
    r.summary = doc.value("summary", json::object());
    for (const auto& a : doc.value("anchors", json::array())) {
      Anchor an;
      an.name = a.at("name").get<std::string>();
      an.value = a.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN() : a.at("value").get<double>();
      an.lo = unbound(a.at("lo"), -kInf);
      an.hi = unbound(a.at("hi"), kInf);
      an.unit = a.value("unit", "");
      an.pass = a.at("pass").get<bool>();
      r.anchors.push_back(std::move(an));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed scenario summary: ") + e.what());
  }
  return r;
}

}  // namespace strainsim::scenario
