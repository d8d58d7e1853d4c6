#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "strainsim/errors.hpp"
#include "strainsim/photonics.hpp"

using namespace strainsim;
using namespace strainsim::photonics;

namespace {

// Brute-force grid search of the minimum |T(out1, in0)|^2 of a dCPS element.
double grid_min_cross(const std::array<double, 4>& r, int n) {
  double best = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto m = dcps_mzi(2 * std::numbers::pi * i / n, 2 * std::numbers::pi * j / n, r);
      best = std::min(best, std::norm(m(1, 0)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("elements are unitary") {
  CHECK(unitarity_error(coupler(0.3)) < 1e-15);
  CHECK(unitarity_error(mzi(1.1, 0.45, 0.55)) < 1e-15);
  CHECK(unitarity_error(dcps_mzi(0.3, 2.0, {0.45, 0.55, 0.48, 0.52})) < 1e-15);
  CHECK(max_singular_value(mzi(0.7, 0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(std::norm(coupler(0.3)(1, 0)) == doctest::Approx(0.3));
  CHECK_THROWS_AS(coupler(1.2), RatioDomainError);
}

TEST_CASE("single MZI cross-port floor is (sqrt(r2(1-r1)) - sqrt(r1(1-r2)))^2") {
  const double r1 = 0.45, r2 = 0.55;
  const double floor = std::pow(std::sqrt(r2 * (1 - r1)) - std::sqrt(r1 * (1 - r2)), 2);
  const auto net = single_element_network({"m", ElementKind::mzi, {r1, r2}});
  const auto ext = optimize_extinction(net, "out1", "in0");
  CHECK(ext.p_min == doctest::Approx(floor).epsilon(1e-6));
  CHECK(ext.extinction_db == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("dCPS optimizer reaches at least the grid oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.475, 0.525);
  for (int n = 0; n < 10; ++n) {
    const std::array<double, 4> r{u(rng), u(rng), u(rng), u(rng)};
    const auto net = single_element_network({"m", ElementKind::dcps, {r[0], r[1], r[2], r[3]}});
    const auto ext = optimize_extinction(net, "out1", "in0");
    const double grid = grid_min_cross(r, 128);
    CHECK(ext.p_min <= grid + 1e-15);
    CHECK(ext.p_min >= 0.0);
  }
}

TEST_CASE("four-by-one switch composes and stays unitary") {
  auto net = four_by_one_switch({0.45, 0.55, 0.48, 0.52}, {0.53, 0.47, 0.55, 0.46});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  for (int n = 0; n < 20; ++n) {
    for (const auto& k : net.phase_keys()) net.phases[k] = u(rng);
    CHECK(unitarity_error(net.transfer()) < 1e-10);
  }
  CHECK(net.phase_keys().size() == 5);
  CHECK(net.output_index("A") == 0);
}

TEST_CASE("topology errors") {
  auto net = four_by_one_switch();
  net.edges.push_back({"ch1", "f.in1"});
  CHECK_THROWS_AS(net.validate(), TopologyError);
  auto cyc = single_element_network({"m", ElementKind::mzi, {0.5, 0.5}});
  cyc.edges.push_back({"m.out0", "m.in0"});
  CHECK_THROWS_AS(cyc.validate(), TopologyError);
  auto dangling = four_by_one_switch();
  dangling.edges.pop_back();
  CHECK_THROWS_AS(dangling.validate(), TopologyError);
}

TEST_CASE("shortfall is reported only when a target is set") {
  const auto net = single_element_network({"m", ElementKind::mzi, {0.45, 0.55}});
  ExtinctionOptions opt;
  opt.min_extinction_db = 40.0;
  CHECK_THROWS_AS(optimize_extinction(net, "out1", "in0", opt), OptimizationShortfallError);
}

TEST_CASE("element kind names") {
  for (auto k : {ElementKind::coupler, ElementKind::phase, ElementKind::mzi, ElementKind::dcps}) {
    CHECK(element_kind_from_string(to_string(k)) == k);
  }
}
