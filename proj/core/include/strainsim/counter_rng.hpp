#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The 64-bit seed
// is the key; the 64-bit stream id and a 64-bit block index form the counter, so
// every (seed, stream) pair is an independent, reproducible substream.

#include <array>
#include <cmath>
#include <cstdint>

namespace strainsim {

class CounterRng {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (lane_ == 2) {
      block_ = philox(counter_block(index_++), key_);
      lane_ = 0;
    }
    const std::uint64_t hi = block_[2 * lane_ + 1];
    const std::uint64_t lo = block_[2 * lane_];
    ++lane_;
    return (hi << 32) | lo;
  }

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open0() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1p-53; }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1p-53; }

  /// Exponential variate with the given mean, by inversion.
  double exponential(double mean) { return -mean * std::log(uniform_open0()); }

  static Block philox(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  Block counter_block(std::uint64_t index) const {
    return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  }

  Key key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  Block block_{};
  int lane_ = 2;
};

}  // namespace strainsim
