// Acceptance checks. With no arguments every criterion runs; "acceptance 3 5" runs a subset.
// Prints one PASS/FAIL line per criterion and exits non-zero if any selected one fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strainsim/config.hpp"
#include "strainsim/crystal_frames.hpp"
#include "strainsim/errors.hpp"
#include "strainsim/photon_streams.hpp"
#include "strainsim/photonics.hpp"
#include "strainsim/scenario.hpp"
#include "strainsim/snv_hamiltonian.hpp"
#include "strainsim/spectroscopy.hpp"

namespace fs = std::filesystem;
using namespace strainsim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const config::DeviceConfig& device() {
  static const config::DeviceConfig c = config::load_config(STRAINSIM_TEST_CONFIG);
  return c;
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("strainsim-acceptance-" + tag);
  fs::remove_all(p);
  return p;
}

// Runs a scenario and folds the named anchors into the outcome.
void check_anchors(Outcome& o, const std::string& name, const std::vector<std::string>& anchors) {
  const auto r = scenario::run_scenario(name, device(), scratch(name));
  for (const auto& want : anchors) {
    bool found = false;
    for (const auto& a : r.anchors) {
      if (a.name != want) continue;
      found = true;
      o.require(a.pass, a.name + "=" + num(a.value) + (a.unit.empty() ? "" : " " + a.unit));
    }
    if (!found) o.require(false, want + " missing");
  }
  fs::remove_all(r.out_dir.parent_path());
}

Outcome susceptibility() {
  Outcome o;
  check_anchors(o, "dc-tuning", {"susceptibility_SnV1_phz", "susceptibility_SnV2_phz"});
  return o;
}

Outcome dc_range() {
  Outcome o;
  check_anchors(o, "dc-tuning", {"dc_tuning_abs_ghz", "hold_power_nw"});
  return o;
}

Outcome resonance() {
  Outcome o;
  check_anchors(o, "resonance-enhancement", {"enhancement_ratio", "delta_ac_on_ghz"});
  return o;
}

Outcome power() {
  Outcome o;
  check_anchors(o, "power-budget", {"dissipated_0p25v_10mhz_nw", "dissipated_0p5v_2p5ghz_uw"});
  return o;
}

Outcome sidebands() {
  namespace sp = spectroscopy;
  Outcome o;
  double worst = 0.0;
  const auto grid = sp::linspace(-10.0, 10.0, 4001);
  for (double beta : {0.1, 0.5, 1.0, 1.5, 2.4048, 3.0, 4.5}) {
    const auto spec = sp::synth_sidebands(0.0, 0.12, beta, 1.0, std::nullopt, grid);
    worst = std::max(worst, std::abs(sp::fit_sideband_comb(spec, 1.0).beta - beta));
  }
  o.require(worst <= 1e-4, "beta closure " + num(worst));

  double min_sum = 1.0;
  for (double beta = 0.0; beta <= 10.0; beta += 0.25) {
    double s = 0.0;
    for (int k = -sp::default_k_max(beta); k <= sp::default_k_max(beta); ++k) s += std::pow(sp::bessel_j(k, beta), 2);
    min_sum = std::min(min_sum, s);
  }
  o.require(min_sum >= 0.999, "sum J_k^2 >= " + num(min_sum));

  const double z = 2.4048;
  const double null_db = 10 * std::log10(std::pow(sp::bessel_j(1, z), 2) / std::pow(sp::bessel_j(0, z), 2));
  o.require(null_db > 40.0, "carrier null " + num(null_db) + " dB");

  const double n = sp::phonon_number(1.0, 1e9, 1e4);
  o.require(std::abs(n - 1e5) <= 1e-6 * 1e5, "<n>=" + num(n));
  return o;
}

Outcome spin_phonon() {
  Outcome o;
  check_anchors(o, "gsm-sweep",
                {"g_sm_at_field_hz", "g_sm_peak_interior", "g_sm_peak_hz", "g_sm_peak_field_t",
                 "zero_prestrain_monotone", "zero_prestrain_degenerate_points", "zero_prestrain_max_over_g_orb"});
  return o;
}

Outcome odmr() {
  Outcome o;
  check_anchors(o, "spin-odmr", {"odmr_peak_offset_mhz", "spin_splitting_mhz", "rabi_reference_mhz"});
  return o;
}

// Minimum |T(out1, in0)|^2 over an n x n phase grid.
double grid_floor(const photonics::Element& e, int n) {
  double best = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::map<std::string, double> ph{{"m.theta", 2 * std::numbers::pi * i / n},
                                             {"m.phi", 2 * std::numbers::pi * j / n}};
      best = std::min(best, std::norm(e.transfer(ph)(1, 0)));
      if (e.kind == photonics::ElementKind::mzi) break;
    }
  }
  return best;
}

Outcome photonics_suite() {
  namespace ph = photonics;
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> err(-0.05, 0.05);
  double worst_dcps = 1e9;
  int above40 = 0, single_below = 0;
  const int draws = 40;
  for (int n = 0; n < draws; ++n) {
    const std::array<double, 4> r{0.5 * (1 + err(rng)), 0.5 * (1 + err(rng)), 0.5 * (1 + err(rng)),
                                  0.5 * (1 + err(rng))};
    const ph::Element dual{"m", ph::ElementKind::dcps, {r[0], r[1], r[2], r[3]}};
    const ph::Element single{"m", ph::ElementKind::mzi, {r[0], r[1]}};
    const double d_db = ph::optimize_extinction(ph::single_element_network(dual), "out1", "in0").extinction_db;
    const double s_floor = grid_floor(single, 4096);
    const double s_db = 10 * std::log10((1 - s_floor) / std::max(s_floor, 1e-30));
    worst_dcps = std::min(worst_dcps, d_db);
    if (d_db > 40.0) ++above40;
    if (s_db < d_db) ++single_below;
  }
  const auto frac = [&](int k) { return std::to_string(k) + "/" + std::to_string(draws); };
  o.require(above40 == draws, "dCPS >40 dB in " + frac(above40) + " draws at +/-5% (worst " + num(worst_dcps) + " dB)");
  o.require(single_below == draws, "single-MZI ceiling below dCPS in " + frac(single_below));

  auto net = device().network;
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  double unit = 0.0;
  for (int n = 0; n < 100; ++n) {
    for (const auto& k : net.phase_keys()) net.phases[k] = phase(rng);
    unit = std::max(unit, ph::unitarity_error(net.transfer()));
  }
  o.require(unit <= 1e-10, "unitarity " + num(unit));

  // g2(0) across seeds: pooled mean against 1 - rho^2.
  for (const auto& [ch, s, b] : {std::tuple{"ch2", 4e5, 1e5}, std::tuple{"ch3", 5.5e5, 5e4}}) {
    ph::SwitchNetwork n2 = device().network;
    ph::ExtinctionOptions opt;
    const std::string elem = std::string(ch) == "ch2" ? "s1" : "s2";
    opt.phase_keys = {elem + ".theta", elem + ".phi"};
    const auto ext = ph::optimize_extinction(n2, elem == "s1" ? "drop1" : "drop2", ch, opt);
    for (const auto& [k, v] : ext.phases) n2.phases[k] = v;
    n2.phases["f.theta"] = std::numbers::pi / 2;
    const double expected = ph::g2_zero_expected(s, b);
    double sum = 0.0, var = 0.0;
    int outliers = 0;
    const int seeds = 20;
    for (int seed = 1; seed <= seeds; ++seed) {
      const auto rec = ph::simulate_photon_streams({{ch, 5.0, s, b}}, n2, 0.5, static_cast<std::uint64_t>(seed));
      const auto z = ph::g2_zero(ph::g2_histogram(rec[n2.output_index("A")], rec[n2.output_index("B")]));
      sum += z.value;
      var += z.stderr_ * z.stderr_;
      if (std::abs(z.value - expected) > 3 * z.stderr_) ++outliers;
    }
    const double mean = sum / seeds;
    const double sem = std::sqrt(var) / seeds;
    o.require(std::abs(mean - expected) <= 3 * sem, std::string(ch) + " g2(0)=" + num(mean) + "+/-" + num(sem) +
                                                        " vs " + num(expected) + " (" + std::to_string(outliers) +
                                                        "/20 seeds beyond 3 sigma)");
  }
  return o;
}

Outcome hamiltonian_properties() {
  using snv::Manifold;
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const snv::SnVParams p;
  auto random_strain = [&](double scale) {
    return crystal::StrainTensor::from_voigt(
        {scale * u(rng), scale * u(rng), scale * u(rng), scale * u(rng), scale * u(rng), scale * u(rng)},
        rng() % 2 ? crystal::Frame::snv_axial : crystal::Frame::snv_transverse);
  };
  auto random_field = [&] { return Eigen::Vector3d(u(rng), u(rng), u(rng)); };
  int fail_herm = 0, fail_kramers = 0, fail_trace = 0, fail_a1 = 0, fail_slope = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto eps = random_strain(1e-4);
    const auto m = rng() % 2 ? Manifold::ground : Manifold::excited;
    const auto h = snv::build_manifold_hamiltonian(p, m, eps, random_field());
    if ((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12) ++fail_herm;

    const auto es = snv::diagonalize(h);
    const double tr = h.matrix.trace().real();
    const double sum = es.values[0] + es.values[1] + es.values[2] + es.values[3];
    if (std::abs(tr - sum) > 1e-9 * std::max(1.0, std::abs(tr))) ++fail_trace;

    const auto h0 = snv::diagonalize(snv::build_manifold_hamiltonian(p, m, random_strain(1e-4), Eigen::Vector3d::Zero()));
    if (std::abs(h0.values[1] - h0.values[0]) > 1e-9 || std::abs(h0.values[3] - h0.values[2]) > 1e-9) ++fail_kramers;
  }
  for (int n = 0; n < 1000; ++n) {
    // A1 strain with t_par_g = t_par_u and t_perp_g = t_perp_u shifts both manifolds equally.
    snv::SnVParams q = p;
    q.t_par_u_phz = q.t_par_g_phz;
    q.t_perp_u_phz = q.t_perp_g_phz;
    const auto eps = random_strain(1e-4);
    const double a1 = 1e-4 * u(rng);
    Eigen::Matrix3d extra = Eigen::Matrix3d::Zero();
    extra(2, 2) = a1;
    extra(0, 0) = extra(1, 1) = 0.5 * a1;
    const crystal::StrainTensor shifted(eps.components() + extra, eps.frame());
    const Eigen::Vector3d b = random_field();
    const auto t0 = snv::optical_transitions(q, eps, b);
    const auto t1 = snv::optical_transitions(q, shifted, b);
    bool ok = t0.size() == t1.size();
    for (std::size_t i = 0; ok && i < t0.size(); ++i) {
      if (std::abs(t0[i].frequency_ghz - t1[i].frequency_ghz) > 1e-6) ok = false;
    }
    if (!ok) ++fail_a1;
  }
  for (int n = 0; n < 1000; ++n) {
    const auto base = random_strain(1e-6);
    const double h = 1e-7;
    Eigen::Matrix3d dz = Eigen::Matrix3d::Zero();
    dz(2, 2) = h;
    const crystal::StrainTensor up(base.components() + dz, base.frame());
    const crystal::StrainTensor dn(base.components() - dz, base.frame());
    const double slope = (snv::delta_dc(p, up).exact_ghz - snv::delta_dc(p, dn).exact_ghz) / (2 * h);
    const double expected = (p.t_par_u_phz - p.t_par_g_phz) * snv::kGhzPerPhz;
    if (std::abs(slope - expected) > 1e-3 * std::abs(expected)) ++fail_slope;
  }
  o.require(fail_herm == 0, "hermiticity failures " + std::to_string(fail_herm));
  o.require(fail_kramers == 0, "Kramers failures " + std::to_string(fail_kramers));
  o.require(fail_trace == 0, "trace failures " + std::to_string(fail_trace));
  o.require(fail_a1 == 0, "A1 invariance failures " + std::to_string(fail_a1));
  o.require(fail_slope == 0, "slope failures " + std::to_string(fail_slope));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  int compared = 0, differing = 0;
  for (const auto& name : scenario::scenario_names()) {
    const auto ra = scenario::run_scenario(name, device(), a, 77);
    const auto rb = scenario::run_scenario(name, device(), b, 77);
    if (ra.manifest != rb.manifest) {
      ++differing;
      continue;
    }
    for (const auto& f : ra.manifest) {
      ++compared;
      if (slurp(ra.out_dir / f) != slurp(rb.out_dir / f)) ++differing;
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
  o.require(differing == 0, std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ");
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "susceptibility regression", susceptibility},
      {2, "DC tuning range and hold power", dc_range},
      {3, "resonant enhancement", resonance},
      {4, "power budget", power},
      {5, "sideband physics", sidebands},
      {6, "spin-phonon anchors", spin_phonon},
      {7, "acoustic ODMR", odmr},
      {8, "photonics", photonics_suite},
      {9, "Hamiltonian property suite", hamiltonian_properties},
      {10, "determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %-32s %6.2fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
