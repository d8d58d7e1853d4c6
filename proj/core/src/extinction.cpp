#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "strainsim/errors.hpp"
#include "strainsim/photonics.hpp"

namespace strainsim::photonics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxSimplexIterations = 4000;
constexpr double kSimplexSizeTol = 1e-13;

using Objective = std::function<double(const std::vector<double>&)>;

double gsl_trampoline(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  std::vector<double> v(x->size);
  for (std::size_t i = 0; i < x->size; ++i) v[i] = gsl_vector_get(x, i);
  return f(v);
}

// Nelder-Mead refinement from `start`; returns the best point found.
std::vector<double> simplex_refine(const Objective& f, std::vector<double> start, double step) {
  static std::once_flag handler_once;
  std::call_once(handler_once, [] { gsl_set_error_handler_off(); });
  const std::size_t n = start.size();
  gsl_multimin_function fn{&gsl_trampoline, n, const_cast<Objective*>(&f)};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, start[i]);
    gsl_vector_set(ss, i, step);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int it = 0; it < kMaxSimplexIterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), kSimplexSizeTol) == GSL_SUCCESS) break;
  }
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i] = gsl_vector_get(s->x, i);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return f(best) <= f(start) ? best : start;
}

double wrap_phase(double p) {
  p = std::fmod(p, kTwoPi);
  return p < 0.0 ? p + kTwoPi : p;
}

}  // namespace

ExtinctionResult optimize_extinction(const SwitchNetwork& network, std::string_view target_output,
                                     std::string_view dark_input, const ExtinctionOptions& options) {
  network.validate();
  const auto row = static_cast<Eigen::Index>(network.output_index(target_output));
  const auto col = static_cast<Eigen::Index>(network.input_index(dark_input));
  const std::vector<std::string> keys = options.phase_keys.empty() ? network.phase_keys() : options.phase_keys;
  if (keys.empty()) throw TopologyError("network has no phases to optimize");
  if (options.grid_points < 2) throw ParameterError("extinction grid needs at least 2 points per phase");

  SwitchNetwork work = network;
  auto power = [&](const std::vector<double>& p) {
    for (std::size_t i = 0; i < keys.size(); ++i) work.phases[keys[i]] = p[i];
    return std::norm(work.transfer()(row, col));
  };

  // Coarse scan over the first two phases; the rest start at their current values.
  std::vector<double> base(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto it = network.phases.find(keys[i]);
    base[i] = it == network.phases.end() ? 0.0 : it->second;
  }
  const std::size_t scanned = std::min<std::size_t>(keys.size(), 2);
  const int g = options.grid_points;
  const double step = kTwoPi / g;
  std::vector<double> lo_pt = base, hi_pt = base, p = base;
  double lo = std::numeric_limits<double>::infinity(), hi = -1.0;
  const int n2 = scanned == 2 ? g : 1;
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < n2; ++b) {
      p[0] = a * step;
      if (scanned == 2) p[1] = b * step;
      const double v = power(p);
      if (v < lo) {
        lo = v;
        lo_pt = p;
      }
      if (v > hi) {
        hi = v;
        hi_pt = p;
      }
    }
  }

  const double floor = options.power_floor;
  const Objective minimize_log = [&](const std::vector<double>& x) { return std::log10(power(x) + floor); };
  const Objective maximize = [&](const std::vector<double>& x) { return -power(x); };
  lo_pt = simplex_refine(minimize_log, lo_pt, step);
  hi_pt = simplex_refine(maximize, hi_pt, step);

  ExtinctionResult out;
  out.p_min = power(lo_pt);
  out.p_max = power(hi_pt);
  for (std::size_t i = 0; i < keys.size(); ++i) out.phases[keys[i]] = wrap_phase(lo_pt[i]);
  out.extinction_db = 10.0 * std::log10((out.p_max + floor) / (out.p_min + floor));
  if (options.min_extinction_db && out.extinction_db < *options.min_extinction_db) {
    throw OptimizationShortfallError("extinction " + std::to_string(out.extinction_db) + " dB below the required " +
                                     std::to_string(*options.min_extinction_db) + " dB");
  }
  return out;
}

}  // namespace strainsim::photonics
