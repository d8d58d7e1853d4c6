#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "strainsim/errors.hpp"
#include "strainsim/spectroscopy.hpp"

using namespace strainsim;
using namespace strainsim::spectroscopy;

namespace {

using big = boost::multiprecision::cpp_dec_float_50;

// Power series sum_m (-1)^m (x/2)^(2m+k) / (m! (m+k)!) in 50-digit arithmetic.
double bessel_series(int k, double xd) {
  const big x(xd);
  const big half = x / 2;
  big term = 1;
  for (int i = 1; i <= k; ++i) term *= half / i;
  big sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -half * half / (m * (m + k));
    sum += term;
    if (abs(term) < big("1e-45")) break;
  }
  return sum.convert_to<double>();
}

// Phase average of a unit-height Lorentzian under d -> d - D cos(phi):
// <g / (g - i(d - D cos phi))> = g / sqrt((g - i d)^2 + D^2), g = fwhm / 2.
double slow_modulation_closed_form(double d, double fwhm, double delta) {
  const std::complex<double> g(fwhm / 2, 0.0);
  const std::complex<double> a = g - std::complex<double>(0, d);
  return std::real(g / std::sqrt(a * a + delta * delta));
}

}  // namespace

TEST_CASE("bessel_j against a high-precision series") {
  for (int k : {0, 1, 2, 3, 5, 10, 20}) {
    for (double x : {0.1, 0.5, 1.0, 2.4048, 5.0, 10.0, 17.5}) {
      // absolute floor for values near a zero of J_k
      CHECK(std::abs(bessel_j(k, x) - bessel_series(k, x)) <= 1e-12 * std::abs(bessel_series(k, x)) + 1e-15);
    }
  }
  CHECK(bessel_j(-3, 2.0) == doctest::Approx(-bessel_j(3, 2.0)));
  CHECK(bessel_j(3, -2.0) == doctest::Approx(-bessel_j(3, 2.0)));
  CHECK(bessel_j(2, -2.0) == doctest::Approx(bessel_j(2, 2.0)));
  CHECK_THROWS_AS(bessel_j(31, 1.0), BesselDomainError);
  CHECK_THROWS_AS(bessel_j(1, 51.0), BesselDomainError);
}

TEST_CASE("slow modulation agrees with the closed-form average") {
  const auto grid = linspace(-5.0, 5.0, 401);
  for (double delta : {0.0, 0.3, 1.9}) {
    const auto s = synth_slow_modulation(0.0, 0.12, delta, grid, 4096);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(s.signal[i] == doctest::Approx(slow_modulation_closed_form(grid[i], 0.12, delta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("lorentzian fit recovers synthetic parameters") {
  const auto grid = linspace(-2.0, 2.0, 801);
  const auto s = synth_static(0.13, 0.12, 3.0, 0.2, grid);
  const auto f = fit_lorentzian(s);
  CHECK(f.center == doctest::Approx(0.13).epsilon(1e-9));
  CHECK(f.fwhm == doctest::Approx(0.12).epsilon(1e-9));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.baseline == doctest::Approx(0.2).epsilon(1e-9));
  PLESpectrum flat{grid, std::vector<double>(grid.size(), 1.0), {}};
  CHECK_THROWS_AS(fit_lorentzian(flat), FlatSpectrumError);
}

TEST_CASE("sideband synthesis conserves weight and nulls the carrier at the first zero of J0") {
  double total = 0.0;
  for (int k = -default_k_max(2.0); k <= default_k_max(2.0); ++k) total += std::pow(bessel_j(k, 2.0), 2);
  CHECK(total >= 0.999);
  const double carrier = std::pow(bessel_j(0, 2.404825557695773), 2);
  const double first = std::pow(bessel_j(1, 2.404825557695773), 2);
  CHECK(10 * std::log10(first / carrier) > 40.0);
  const auto grid = linspace(-6.0, 6.0, 2401);
  CHECK_THROWS_AS(synth_sidebands(0.0, 0.12, 1.0, 0.1, std::nullopt, grid), UnresolvedSidebandError);
  const auto warn = synth_sidebands(0.0, 0.12, 1.0, 0.3, std::nullopt, grid);
  CHECK(warn.meta.count("warning") == 1);
}

TEST_CASE("sideband comb fit closes on beta") {
  const auto grid = linspace(-8.0, 8.0, 3201);
  for (double beta : {0.3, 1.0, 2.4048, 3.7}) {
    const auto s = synth_sidebands(0.0, 0.12, beta, 1.0, std::nullopt, grid);
    const auto f = fit_sideband_comb(s, 1.0);
    CHECK(f.beta == doctest::Approx(beta).epsilon(1e-6));
  }
}

TEST_CASE("delta_ac from horns and from broadening") {
  const auto grid = linspace(-4.0, 4.0, 1601);
  const auto resolved = extract_delta_ac(synth_slow_modulation(0.0, 0.12, 1.9, grid), 0.12);
  CHECK(resolved.horns_resolved);
  CHECK(std::abs(resolved.value_ghz - 1.9) <= 2 * resolved.sigma_ghz);
  const auto narrow = extract_delta_ac(synth_slow_modulation(0.0, 0.12, 0.02, grid), 0.12);
  CHECK_FALSE(narrow.horns_resolved);
  CHECK(std::abs(narrow.value_ghz - 0.02) <= 2 * narrow.sigma_ghz);
  CHECK_THROWS_AS(extract_delta_ac(synth_slow_modulation(0.0, 0.12, 0.02, grid)), AmbiguousWidthError);
}

TEST_CASE("weighted linear fit against normal equations") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  const std::vector<double> y{1.1, 2.9, 5.2, 7.1, 8.8};
  const std::vector<double> s{0.1, 0.2, 0.1, 0.3, 0.2};
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1 / (s[i] * s[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  const auto f = fit_linear(x, y, s);
  CHECK(f.slope == doctest::Approx((sw * sxy - sx * sy) / det));
  CHECK(f.intercept == doctest::Approx((sxx * sy - sx * sxy) / det));
  CHECK(f.slope_sigma == doctest::Approx(std::sqrt(sw / det)));
  const std::vector<double> same{2, 2, 2};
  CHECK_THROWS_AS(fit_linear(same, same), DegenerateAbscissaError);
}

TEST_CASE("phonon number conventions") {
  CHECK(phonon_number(1.0, 1e9, 1e4) == doctest::Approx(1e5));
  CHECK(phonon_number(1.0, 1e9, 1e4, ModulationConvention::sqrt_n) == doctest::Approx(2.5e9));
  CHECK(modulation_index(phonon_number(0.7, 1e9, 3e3), 1e9, 3e3) == doctest::Approx(0.7));
  CHECK_THROWS_AS(phonon_number(1.0, 1e9, 0.0), DivisionDomainError);
  CHECK(modulation_convention_from_string("sqrt-n") == ModulationConvention::sqrt_n);
}

TEST_CASE("spectrum csv round trip") {
  const auto s = synth_static(0.0, 0.12, 1.0, 0.0, linspace(-1, 1, 11));
  std::stringstream io;
  write_spectrum_csv(io, s);
  const auto back = read_spectrum_csv(io);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.detuning_ghz[i] == doctest::Approx(s.detuning_ghz[i]).epsilon(1e-11));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.signal[i] == doctest::Approx(s.signal[i]).epsilon(1e-11));
  std::stringstream bad("detuning_ghz,signal\n0,abc\n");
  CHECK_THROWS_AS(read_spectrum_csv(bad), SpectrumFormatError);
}

TEST_CASE("batch fits match sequential fits") {
  std::vector<PLESpectrum> specs;
  const auto grid = linspace(-2, 2, 401);
  for (int i = 0; i < 12; ++i) specs.push_back(synth_static(0.01 * i, 0.1 + 0.01 * i, 1.0, 0.0, grid));
  specs.push_back({grid, std::vector<double>(grid.size(), 0.5), {}});
  const auto one = batch_fit_lorentzian(specs, 1);
  const auto many = batch_fit_lorentzian(specs, 4);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].fit.has_value() == many[i].fit.has_value());
    if (one[i].fit) CHECK(one[i].fit->center == many[i].fit->center);
  }
  CHECK_FALSE(many.back().fit.has_value());
  CHECK_FALSE(many.back().error.empty());
}
