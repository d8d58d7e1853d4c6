#include "strainsim/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Core>

#include "least_squares.hpp"
#include "strainsim/errors.hpp"

namespace strainsim::spectroscopy {

namespace {

constexpr int kMaxBesselOrder = 30;
constexpr double kMaxBesselArg = 50.0;
constexpr int kMinFitPoints = 8;
// Dip between horns must fall this far below the weaker horn to count as resolved.
constexpr double kHornDipFraction = 0.9;

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void require_flat_check(const PLESpectrum& spec) {
  const auto [lo, hi] = std::minmax_element(spec.signal.begin(), spec.signal.end());
  const double scale = std::max(std::abs(*hi), 1e-300);
  if (*hi - *lo <= 1e-12 * scale) throw FlatSpectrumError("signal is constant; nothing to fit");
}

// Linear interpolation of where the signal crosses `level` walking outward from `peak`.
double crossing(const PLESpectrum& spec, std::size_t peak, double level, int dir) {
  const auto& x = spec.detuning_ghz;
  const auto& y = spec.signal;
  std::size_t i = peak;
  while (true) {
    if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == y.size())) return x[i];
    const std::size_t j = dir < 0 ? i - 1 : i + 1;
    if (y[j] <= level) {
      const double t = (y[i] - level) / (y[i] - y[j]);
      return x[i] + t * (x[j] - x[i]);
    }
    i = j;
  }
}

struct Guess {
  double center, fwhm, amplitude, baseline;
  std::size_t peak;
};

Guess initial_guess(const PLESpectrum& spec) {
  const auto& y = spec.signal;
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double baseline = percentile(y, 0.1);
  const double amplitude = y[peak] - baseline;
  const double half = baseline + 0.5 * amplitude;
  double fwhm = crossing(spec, peak, half, +1) - crossing(spec, peak, half, -1);
  const double step = (spec.detuning_ghz.back() - spec.detuning_ghz.front()) / static_cast<double>(y.size() - 1);
  fwhm = std::max(fwhm, step);
  return {spec.detuning_ghz[peak], fwhm, amplitude, baseline, peak};
}

// Bessel weights and their beta-derivatives for |k| <= k_max.
void comb_weights(double beta, int k_max, std::vector<double>& w, std::vector<double>& dw) {
  w.assign(2 * k_max + 1, 0.0);
  dw.assign(2 * k_max + 1, 0.0);
  for (int k = -k_max; k <= k_max; ++k) {
    const double jk = bessel_j(k, beta);
    const double djk = 0.5 * (bessel_j(k - 1, beta) - bessel_j(k + 1, beta));
    w[k + k_max] = jk * jk;
    dw[k + k_max] = 2.0 * jk * djk;
  }
}

int clamp_k_max(double beta) { return std::clamp(default_k_max(std::abs(beta)), 1, kMaxBesselOrder - 1); }

}  // namespace

void PLESpectrum::validate() const {
  if (detuning_ghz.size() != signal.size()) {
    throw SpectrumFormatError("detuning and signal lengths differ (" + std::to_string(detuning_ghz.size()) +
                              " vs " + std::to_string(signal.size()) + ")");
  }
  for (std::size_t i = 0; i < detuning_ghz.size(); ++i) {
    if (!std::isfinite(detuning_ghz[i])) throw SpectrumFormatError("non-finite detuning at row " + std::to_string(i));
    if (i > 0 && !(detuning_ghz[i] > detuning_ghz[i - 1])) {
      throw SpectrumFormatError("detuning grid not strictly ascending at row " + std::to_string(i));
    }
    if (!std::isfinite(signal[i]) || signal[i] < 0.0) {
      throw SpectrumFormatError("signal must be finite and non-negative (row " + std::to_string(i) + ")");
    }
  }
}

std::string_view to_string(ModulationConvention c) {
  return c == ModulationConvention::as_printed ? "as-printed" : "sqrt-n";
}

ModulationConvention modulation_convention_from_string(std::string_view name) {
  if (name == "as-printed") return ModulationConvention::as_printed;
  if (name == "sqrt-n") return ModulationConvention::sqrt_n;
  throw ParameterError("unknown modulation index convention '" + std::string(name) + "'");
}

double bessel_j(int k, double x) {
  if (std::abs(k) > kMaxBesselOrder || !(std::abs(x) <= kMaxBesselArg)) {
    throw BesselDomainError("J_" + std::to_string(k) + "(" + std::to_string(x) + ") outside |k| <= 30, |x| <= 50");
  }
  double sign = 1.0;
  if (k < 0) {
    k = -k;
    if (k % 2) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (k % 2) sign = -sign;
  }
  return sign * std::cyl_bessel_j(static_cast<double>(k), x);
}

double lorentzian(double detuning, double fwhm) {
  const double g = 0.5 * fwhm;
  return g * g / (detuning * detuning + g * g);
}

int default_k_max(double beta) { return static_cast<int>(std::ceil(beta)) + 8; }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

PLESpectrum synth_static(double center, double fwhm, double amplitude, double baseline,
                         std::span<const double> grid) {
  if (!(fwhm > 0.0)) throw ParameterError("fwhm must be positive");
  PLESpectrum s;
  s.detuning_ghz.assign(grid.begin(), grid.end());
  s.signal.reserve(grid.size());
  for (double d : grid) s.signal.push_back(baseline + amplitude * lorentzian(d - center, fwhm));
  return s;
}

PLESpectrum synth_slow_modulation(double center, double fwhm, double delta_ac, std::span<const double> grid,
                                  int n_phase) {
  if (!(fwhm > 0.0)) throw ParameterError("fwhm must be positive");
  if (!(delta_ac >= 0.0)) throw ParameterError("delta_ac must be non-negative");
  if (n_phase < 1) throw ParameterError("phase quadrature needs at least one point");
  std::vector<double> sines(n_phase);
  for (int i = 0; i < n_phase; ++i) sines[i] = std::sin(2.0 * std::numbers::pi * i / n_phase);
  PLESpectrum s;
  s.detuning_ghz.assign(grid.begin(), grid.end());
  s.signal.reserve(grid.size());
  for (double d : grid) {
    double acc = 0.0;
    for (double sn : sines) acc += lorentzian(d - center - delta_ac * sn, fwhm);
    s.signal.push_back(acc / n_phase);
  }
  return s;
}

PLESpectrum synth_sidebands(double center, double fwhm, double beta, double omega_d, std::optional<int> k_max,
                            std::span<const double> grid) {
  if (!(fwhm > 0.0)) throw ParameterError("fwhm must be positive");
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
  if (!(omega_d > fwhm)) {
    throw UnresolvedSidebandError("drive frequency " + std::to_string(omega_d) + " GHz does not exceed fwhm " +
                                  std::to_string(fwhm) + " GHz");
  }
  const int kmax = k_max.value_or(default_k_max(beta));
  if (kmax < 1) throw ParameterError("k_max must be >= 1");
  std::vector<double> w(2 * kmax + 1);
  for (int k = -kmax; k <= kmax; ++k) {
    const double jk = bessel_j(k, beta);
    w[k + kmax] = jk * jk;
  }
  PLESpectrum s;
  s.detuning_ghz.assign(grid.begin(), grid.end());
  s.signal.reserve(grid.size());
  for (double d : grid) {
    double acc = 0.0;
    for (int k = -kmax; k <= kmax; ++k) acc += w[k + kmax] * lorentzian(d - center - k * omega_d, fwhm);
    s.signal.push_back(acc);
  }
  s.meta["k_max"] = std::to_string(kmax);
  if (omega_d < 3.0 * fwhm) s.meta["warning"] = "sidebands overlap: omega_d < 3 fwhm";
  return s;
}

LorentzianFit fit_lorentzian(const PLESpectrum& spec) {
  spec.validate();
  if (spec.size() < static_cast<std::size_t>(kMinFitPoints)) {
    throw SpectrumFormatError("Lorentzian fit needs at least 8 points, got " + std::to_string(spec.size()));
  }
  require_flat_check(spec);
  const Guess g = initial_guess(spec);
  const auto& x = spec.detuning_ghz;
  const auto& y = spec.signal;
  const int m = static_cast<int>(x.size());

  // params: center, fwhm, amplitude, baseline
  detail::LeastSquaresProblem problem;
  problem.n_residuals = m;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < m; ++i) r[i] = p[3] + p[2] * lorentzian(x[i] - p[0], p[1]) - y[i];
  };
  problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
    const double h = 0.5 * p[1];
    for (int i = 0; i < m; ++i) {
      const double u = x[i] - p[0];
      const double den = u * u + h * h;
      const double l = h * h / den;
      j(i, 0) = p[2] * 2.0 * u * h * h / (den * den);
      j(i, 1) = p[2] * h * u * u / (den * den);
      j(i, 2) = l;
      j(i, 3) = 1.0;
    }
  };
  Eigen::VectorXd p0(4);
  p0 << g.center, g.fwhm, g.amplitude, g.baseline;
  const auto res = detail::solve_least_squares(problem, p0);
  if (!res.converged || !res.x.allFinite()) {
    throw FitDivergedError("Lorentzian fit did not converge in " + std::to_string(res.iterations) + " iterations",
                           {res.x.data(), res.x.data() + res.x.size()}, res.residual_norm);
  }
  LorentzianFit f;
  f.center = res.x[0];
  f.fwhm = std::abs(res.x[1]);
  f.amplitude = res.x[2];
  f.baseline = res.x[3];
  f.center_sigma = std::sqrt(std::max(0.0, res.covariance(0, 0)));
  f.fwhm_sigma = std::sqrt(std::max(0.0, res.covariance(1, 1)));
  f.amplitude_sigma = std::sqrt(std::max(0.0, res.covariance(2, 2)));
  f.baseline_sigma = std::sqrt(std::max(0.0, res.covariance(3, 3)));
  f.residual_norm = res.residual_norm;
  f.iterations = res.iterations;
  return f;
}

SidebandFit fit_sideband_comb(const PLESpectrum& spec, double omega_d) {
  spec.validate();
  if (spec.size() < static_cast<std::size_t>(kMinFitPoints)) {
    throw SpectrumFormatError("sideband fit needs at least 8 points, got " + std::to_string(spec.size()));
  }
  if (!(omega_d > 0.0)) throw ParameterError("drive frequency must be positive");
  require_flat_check(spec);
  const Guess g = initial_guess(spec);
  if (omega_d < 3.0 * g.fwhm) {
    throw UnresolvedSidebandError("omega_d = " + std::to_string(omega_d) + " GHz is below 3x the estimated fwhm " +
                                  std::to_string(g.fwhm) + " GHz");
  }
  const auto& x = spec.detuning_ghz;
  const auto& y = spec.signal;
  const int m = static_cast<int>(x.size());

  // Coarse search over (carrier offset, beta) with amplitude and baseline solved linearly.
  double best_cost = std::numeric_limits<double>::infinity();
  double best_center = g.center, best_beta = 0.0, best_amp = g.amplitude, best_base = g.baseline;
  std::vector<double> w, dw;
  for (int shift = -3; shift <= 3; ++shift) {
    const double c = g.center - shift * omega_d;
    for (int b = 0; b <= 200; ++b) {
      const double beta = 0.05 * b;
      const int kmax = clamp_k_max(beta);
      comb_weights(beta, kmax, w, dw);
      double s1 = 0, sm = 0, smm = 0, sy = 0, smy = 0;
      for (int i = 0; i < m; ++i) {
        double model = 0.0;
        for (int k = -kmax; k <= kmax; ++k) model += w[k + kmax] * lorentzian(x[i] - c - k * omega_d, g.fwhm);
        s1 += 1;
        sm += model;
        smm += model * model;
        sy += y[i];
        smy += model * y[i];
      }
      const double det = s1 * smm - sm * sm;
      if (std::abs(det) < 1e-300) continue;
      const double amp = (s1 * smy - sm * sy) / det;
      const double base = (sy - amp * sm) / s1;
      double cost = 0.0;
      for (int i = 0; i < m; ++i) {
        double model = 0.0;
        for (int k = -kmax; k <= kmax; ++k) model += w[k + kmax] * lorentzian(x[i] - c - k * omega_d, g.fwhm);
        const double r = base + amp * model - y[i];
        cost += r * r;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best_center = c;
        best_beta = beta;
        best_amp = amp;
        best_base = base;
      }
    }
  }

  // params: center, fwhm, beta, amplitude, baseline
  detail::LeastSquaresProblem problem;
  problem.n_residuals = m;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    std::vector<double> wl, dwl;
    const int kmax = clamp_k_max(p[2]);
    comb_weights(p[2], kmax, wl, dwl);
    for (int i = 0; i < m; ++i) {
      double model = 0.0;
      for (int k = -kmax; k <= kmax; ++k) model += wl[k + kmax] * lorentzian(x[i] - p[0] - k * omega_d, p[1]);
      r[i] = p[4] + p[3] * model - y[i];
    }
  };
  problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
    std::vector<double> wl, dwl;
    const int kmax = clamp_k_max(p[2]);
    comb_weights(p[2], kmax, wl, dwl);
    const double h = 0.5 * p[1];
    for (int i = 0; i < m; ++i) {
      double model = 0.0, d_center = 0.0, d_fwhm = 0.0, d_beta = 0.0;
      for (int k = -kmax; k <= kmax; ++k) {
        const double u = x[i] - p[0] - k * omega_d;
        const double den = u * u + h * h;
        const double l = h * h / den;
        const double wk = wl[k + kmax];
        model += wk * l;
        d_center += wk * 2.0 * u * h * h / (den * den);
        d_fwhm += wk * h * u * u / (den * den);
        d_beta += dwl[k + kmax] * l;
      }
      j(i, 0) = p[3] * d_center;
      j(i, 1) = p[3] * d_fwhm;
      j(i, 2) = p[3] * d_beta;
      j(i, 3) = model;
      j(i, 4) = 1.0;
    }
  };
  Eigen::VectorXd p0(5);
  p0 << best_center, g.fwhm, best_beta, best_amp, best_base;
  const auto res = detail::solve_least_squares(problem, p0);
  if (!res.converged || !res.x.allFinite()) {
    throw FitDivergedError("sideband fit did not converge in " + std::to_string(res.iterations) + " iterations",
                           {res.x.data(), res.x.data() + res.x.size()}, res.residual_norm);
  }
  SidebandFit f;
  f.center = res.x[0];
  f.fwhm = std::abs(res.x[1]);
  // J_k^2 is even in beta, so the sign is not identifiable.
  f.beta = std::abs(res.x[2]);
  f.amplitude = res.x[3];
  f.baseline = res.x[4];
  f.omega_d = omega_d;
  f.k_max = clamp_k_max(f.beta);
  f.center_sigma = std::sqrt(std::max(0.0, res.covariance(0, 0)));
  f.fwhm_sigma = std::sqrt(std::max(0.0, res.covariance(1, 1)));
  f.beta_sigma = std::sqrt(std::max(0.0, res.covariance(2, 2)));
  f.amplitude_sigma = std::sqrt(std::max(0.0, res.covariance(3, 3)));
  f.baseline_sigma = std::sqrt(std::max(0.0, res.covariance(4, 4)));
  f.residual_norm = res.residual_norm;
  f.iterations = res.iterations;
  return f;
}

DeltaAcEstimate extract_delta_ac(const PLESpectrum& spec, std::optional<double> gamma_ref) {
  spec.validate();
  if (spec.size() < 3) throw SpectrumFormatError("need at least 3 points to locate peaks");
  require_flat_check(spec);
  const auto& x = spec.detuning_ghz;
  const auto& y = spec.signal;
  const std::size_t n = y.size();
  const double step = (x.back() - x.front()) / static_cast<double>(n - 1);
  const double baseline = percentile(y, 0.1);
  const double top = *std::max_element(y.begin(), y.end());
  const double floor_level = baseline + 0.5 * (top - baseline);

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= floor_level) maxima.push_back(i);
  }
  if (maxima.size() >= 2) {
    const std::size_t lo = maxima.front(), hi = maxima.back();
    const double dip = *std::min_element(y.begin() + lo, y.begin() + hi + 1);
    const double weaker = std::min(y[lo], y[hi]);
    if (dip - baseline <= kHornDipFraction * (weaker - baseline)) {
      DeltaAcEstimate e;
      e.value_ghz = 0.5 * (x[hi] - x[lo]);
      // Outer half-width of each horn bounds how far the true edge may sit outside the maximum.
      const double left = x[lo] - crossing(spec, lo, baseline + 0.5 * (y[lo] - baseline), -1);
      const double right = crossing(spec, hi, baseline + 0.5 * (y[hi] - baseline), +1) - x[hi];
      e.sigma_ghz = std::max(0.5 * (left + right), step);
      e.horns_resolved = true;
      return e;
    }
  }
  if (!gamma_ref) {
    throw AmbiguousWidthError("horns not resolved and no reference linewidth given");
  }
  if (!(*gamma_ref > 0.0)) throw ParameterError("reference linewidth must be positive");
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = baseline + 0.5 * (top - baseline);
  const double fwhm = crossing(spec, peak, half, +1) - crossing(spec, peak, half, -1);
  DeltaAcEstimate e;
  e.value_ghz = std::max(0.0, 0.5 * (fwhm - *gamma_ref));
  e.sigma_ghz = std::max(0.5 * *gamma_ref, 2.0 * step);
  return e;
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys, std::span<const double> y_sigmas) {
  if (xs.size() != ys.size()) throw ParameterError("x and y lengths differ");
  if (!y_sigmas.empty() && y_sigmas.size() != xs.size()) throw ParameterError("sigma length differs from data");
  if (xs.size() < 2) throw DegenerateAbscissaError("need at least two points");
  const bool weighted = !y_sigmas.empty();
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double w = 1.0;
    if (weighted) {
      if (!(y_sigmas[i] > 0.0)) throw ParameterError("sigmas must be positive");
      w = 1.0 / (y_sigmas[i] * y_sigmas[i]);
    }
    s += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const double delta = s * sxx - sx * sx;
  const double spread = sxx / s - (sx / s) * (sx / s);
  const double xscale = std::max(sxx / s, 1e-300);
  if (!(spread > 1e-14 * xscale)) throw DegenerateAbscissaError("all x values coincide");
  LinearFit f;
  f.slope = (s * sxy - sx * sy) / delta;
  f.intercept = (sxx * sy - sx * sxy) / delta;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - f.intercept - f.slope * xs[i];
    const double w = weighted ? 1.0 / (y_sigmas[i] * y_sigmas[i]) : 1.0;
    rss += w * r * r;
  }
  f.residual_norm = std::sqrt(rss);
  double var_scale = 1.0;
  if (!weighted) var_scale = xs.size() > 2 ? rss / static_cast<double>(xs.size() - 2) : 0.0;
  f.slope_sigma = std::sqrt(var_scale * s / delta);
  f.intercept_sigma = std::sqrt(var_scale * sxx / delta);
  return f;
}

double phonon_number(double beta, double omega_d_hz, double g_orb_hz, ModulationConvention convention) {
  if (g_orb_hz == 0.0) throw DivisionDomainError("g_orb = 0: phonon number undefined");
  if (!(g_orb_hz > 0.0)) throw ParameterError("g_orb must be positive");
  if (!(beta >= 0.0) || !(omega_d_hz >= 0.0)) throw ParameterError("beta and omega_d must be non-negative");
  const double ratio = beta * omega_d_hz / g_orb_hz;
  return convention == ModulationConvention::as_printed ? ratio : 0.25 * ratio * ratio;
}

double modulation_index(double n, double omega_d_hz, double g_orb_hz, ModulationConvention convention) {
  if (!(omega_d_hz > 0.0)) throw DivisionDomainError("omega_d must be positive");
  if (!(n >= 0.0)) throw ParameterError("phonon number must be non-negative");
  return convention == ModulationConvention::as_printed ? g_orb_hz * n / omega_d_hz
                                                        : 2.0 * g_orb_hz * std::sqrt(n) / omega_d_hz;
}

std::vector<BatchItem> batch_fit_lorentzian(std::span<const PLESpectrum> spectra, int jobs) {
  std::vector<BatchItem> out(spectra.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < spectra.size(); i += stride) {
      try {
        out[i].fit = fit_lorentzian(spectra[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(std::max<std::size_t>(spectra.size(), 1))));
  if (n_threads == 1) {
    work(0, 1);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }
  return out;
}

}  // namespace strainsim::spectroscopy
