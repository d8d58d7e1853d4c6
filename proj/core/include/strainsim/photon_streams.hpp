#pragma once

// Monte Carlo photon arrival streams routed through a switch network, detector
// dead time, and start-stop coincidence histograms for g2.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "strainsim/photonics.hpp"

namespace strainsim::photonics {

struct EmitterSource {
  std::string channel;  // network input name
  double lifetime_ns = 5.0;
  double signal_rate = 0.0;      // counts/s
  double background_rate = 0.0;  // counts/s

  /// Throws ParameterError on negative rates, non-positive lifetime or signal_rate * lifetime >= 1.
  void validate() const;
};

struct DetectorModel {
  double dead_time_s = 50e-9;
};

struct PhotonRecord {
  std::string detector;
  std::vector<double> timestamps_s;  // strictly ascending
};

/// One record per network output. Each source emits a renewal process (interval =
/// lifetime + exponential, mean interval 1 / signal_rate) plus Poisson background,
/// and each photon picks an output with probability |T(out, channel)|^2.
/// Substream ids are 3 * source_index + {0: signal, 1: background, 2: routing}.
std::vector<PhotonRecord> simulate_photon_streams(const std::vector<EmitterSource>& sources,
                                                  const SwitchNetwork& network, double duration_s,
                                                  std::uint64_t seed, const DetectorModel& detector = {});

struct G2Histogram {
  double bin_width_s = 1e-9;
  std::vector<double> tau_s;  // bin centers
  std::vector<std::uint64_t> counts;
  std::vector<double> normalized;
  double plateau_mean = 0.0;
  std::uint64_t plateau_counts = 0;
};

struct G2Zero {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct G2Options {
  double bin_width_s = 1e-9;
  double tau_range_s = 10e-6;
  double plateau_min_s = 5e-6;
  double plateau_max_s = 10e-6;
};

/// Histogram of t_b - t_a over |tau| <= tau_range; bins are centered on multiples of the width.
/// Throws StatisticsError when the plateau holds fewer than 100 coincidences.
G2Histogram g2_histogram(const PhotonRecord& a, const PhotonRecord& b, const G2Options& options = {});

G2Zero g2_zero(const G2Histogram& histogram);

/// 1 - rho^2 with rho = S / (S + B).
double g2_zero_expected(double signal_rate, double background_rate);

void write_records_csv(std::ostream& out, const std::vector<PhotonRecord>& records);
void write_histogram_csv(std::ostream& out, const G2Histogram& histogram);

}  // namespace strainsim::photonics
