#include <doctest.h>

#include <numbers>
#include <sstream>

#include "strainsim/counter_rng.hpp"
#include "strainsim/errors.hpp"
#include "strainsim/photon_streams.hpp"

using namespace strainsim;
using namespace strainsim::photonics;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using B = CounterRng::Block;
  using K = CounterRng::Key;
  CHECK(CounterRng::philox(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(CounterRng::philox(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(CounterRng::philox(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("substreams are reproducible and distinct") {
  CounterRng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CounterRng u(1, 2);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += u.exponential(2.0);
  CHECK(mean / 100000 == doctest::Approx(2.0).epsilon(0.02));
}

namespace {

SwitchNetwork splitter() {
  auto net = single_element_network({"m", ElementKind::mzi, {0.5, 0.5}});
  net.phases["m.theta"] = std::numbers::pi / 2;
  return net;
}

}  // namespace

TEST_CASE("streams are deterministic and respect dead time") {
  const std::vector<EmitterSource> src{{"in0", 5.0, 4e5, 1e5}};
  const auto a = simulate_photon_streams(src, splitter(), 0.02, 9);
  const auto b = simulate_photon_streams(src, splitter(), 0.02, 9);
  REQUIRE(a.size() == 2);
  CHECK(a[0].timestamps_s == b[0].timestamps_s);
  for (const auto& r : a) {
    for (std::size_t i = 1; i < r.timestamps_s.size(); ++i) {
      CHECK(r.timestamps_s[i] - r.timestamps_s[i - 1] >= 50e-9);
    }
  }
  const double rate = static_cast<double>(a[0].timestamps_s.size() + a[1].timestamps_s.size()) / 0.02;
  CHECK(rate == doctest::Approx(5e5).epsilon(0.05));
}

TEST_CASE("g2 of a pure signal source is antibunched") {
  const std::vector<EmitterSource> src{{"in0", 5.0, 4e5, 0.0}};
  const auto rec = simulate_photon_streams(src, splitter(), 0.5, 3);
  const auto h = g2_histogram(rec[0], rec[1]);
  const auto z = g2_zero(h);
  CHECK(z.value < 0.05);
  CHECK(g2_zero_expected(4e5, 1e5) == doctest::Approx(0.36));
  CHECK(g2_zero_expected(5.5e5, 5e4) == doctest::Approx(1 - std::pow(5.5 / 6, 2)));
}

TEST_CASE("sparse data is rejected") {
  PhotonRecord a{"A", {1e-6}}, b{"B", {2e-6}};
  CHECK_THROWS_AS(g2_histogram(a, b), StatisticsError);
  EmitterSource bad{"in0", 5.0, 3e8, 0.0};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("csv writers") {
  std::ostringstream out;
  write_records_csv(out, {{"A", {1e-9, 2e-9}}});
  CHECK(out.str() == "detector,timestamp_ns\nA,1\nA,2\n");
}
