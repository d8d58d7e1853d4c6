#include "strainsim/photon_streams.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "strainsim/counter_rng.hpp"
#include "strainsim/errors.hpp"

namespace strainsim::photonics {

namespace {

constexpr std::size_t kMinPlateauCounts = 100;

struct Arrival {
  double t;
  std::size_t source;
  std::size_t detector;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void EmitterSource::validate() const {
  if (!(lifetime_ns > 0.0)) throw ParameterError("source " + channel + ": lifetime must be positive");
  if (!(signal_rate >= 0.0) || !(background_rate >= 0.0)) {
    throw ParameterError("source " + channel + ": rates must be non-negative");
  }
  if (!(signal_rate * lifetime_ns * 1e-9 < 1.0)) {
    throw ParameterError("source " + channel + ": signal rate exceeds the 1 / lifetime ceiling");
  }
}

std::vector<PhotonRecord> simulate_photon_streams(const std::vector<EmitterSource>& sources,
                                                  const SwitchNetwork& network, double duration_s,
                                                  std::uint64_t seed, const DetectorModel& detector) {
  if (!(duration_s > 0.0)) throw ParameterError("stream duration must be positive");
  if (!(detector.dead_time_s >= 0.0)) throw ParameterError("detector dead time must be non-negative");
  network.validate();
  const Eigen::MatrixXcd t = network.transfer();
  const auto n_out = static_cast<std::size_t>(t.rows());

  std::vector<Arrival> arrivals;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const EmitterSource& src = sources[s];
    src.validate();
    const auto col = static_cast<Eigen::Index>(network.input_index(src.channel));
    std::vector<double> cumulative(n_out);
    double acc = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) {
      acc += std::norm(t(static_cast<Eigen::Index>(o), col));
      cumulative[o] = acc;
    }

    CounterRng sig(seed, 3 * s), bg(seed, 3 * s + 1), route(seed, 3 * s + 2);
    std::vector<double> times;
    if (src.signal_rate > 0.0) {
      const double lifetime = src.lifetime_ns * 1e-9;
      const double wait = 1.0 / src.signal_rate - lifetime;
      for (double tt = sig.exponential(1.0 / src.signal_rate); tt < duration_s;
           tt += lifetime + sig.exponential(wait)) {
        times.push_back(tt);
      }
    }
    if (src.background_rate > 0.0) {
      for (double tt = bg.exponential(1.0 / src.background_rate); tt < duration_s;
           tt += bg.exponential(1.0 / src.background_rate)) {
        times.push_back(tt);
      }
    }
    std::sort(times.begin(), times.end());
    for (double tt : times) {
      const double u = route.uniform();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) continue;  // lost in the network
      arrivals.push_back({tt, s, static_cast<std::size_t>(it - cumulative.begin())});
    }
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return a.t != b.t ? a.t < b.t : a.source < b.source;
  });

  std::vector<PhotonRecord> records(n_out);
  for (std::size_t o = 0; o < n_out; ++o) records[o].detector = network.outputs[o];
  for (const Arrival& a : arrivals) {
    auto& ts = records[a.detector].timestamps_s;
    if (!ts.empty() && a.t - ts.back() < detector.dead_time_s) continue;
    if (!ts.empty() && !(a.t > ts.back())) continue;
    ts.push_back(a.t);
  }
  return records;
}

G2Histogram g2_histogram(const PhotonRecord& a, const PhotonRecord& b, const G2Options& options) {
  if (!(options.bin_width_s > 0.0)) throw ParameterError("bin width must be positive");
  if (!(options.tau_range_s > 0.0)) throw ParameterError("tau range must be positive");
  if (!(options.plateau_min_s < options.plateau_max_s)) throw ParameterError("plateau window is empty");
  const double w = options.bin_width_s;
  const auto half_bins = static_cast<long long>(std::floor(options.tau_range_s / w + 0.5));
  const auto n_bins = static_cast<std::size_t>(2 * half_bins + 1);

  G2Histogram h;
  h.bin_width_s = w;
  h.counts.assign(n_bins, 0);
  h.tau_s.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) h.tau_s[i] = (static_cast<long long>(i) - half_bins) * w;

  const double reach = (static_cast<double>(half_bins) + 0.5) * w;
  const auto& ta = a.timestamps_s;
  const auto& tb = b.timestamps_s;
  std::size_t lo = 0;
  for (double t0 : ta) {
    while (lo < tb.size() && tb[lo] < t0 - reach) ++lo;
    for (std::size_t j = lo; j < tb.size() && tb[j] < t0 + reach; ++j) {
      const auto bin = static_cast<long long>(std::floor((tb[j] - t0) / w + 0.5)) + half_bins;
      if (bin >= 0 && bin < static_cast<long long>(n_bins)) ++h.counts[static_cast<std::size_t>(bin)];
    }
  }

  std::size_t plateau_bins = 0;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double at = std::abs(h.tau_s[i]);
    if (at >= options.plateau_min_s && at <= options.plateau_max_s) {
      h.plateau_counts += h.counts[i];
      ++plateau_bins;
    }
  }
  if (plateau_bins == 0 || h.plateau_counts < kMinPlateauCounts) {
    throw StatisticsError("only " + std::to_string(h.plateau_counts) +
                          " coincidences in the normalization plateau (need 100)");
  }
  h.plateau_mean = static_cast<double>(h.plateau_counts) / static_cast<double>(plateau_bins);
  h.normalized.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) h.normalized[i] = static_cast<double>(h.counts[i]) / h.plateau_mean;
  return h;
}

G2Zero g2_zero(const G2Histogram& histogram) {
  if (histogram.counts.empty() || !(histogram.plateau_mean > 0.0)) {
    throw StatisticsError("histogram has no normalization");
  }
  const std::size_t mid = histogram.counts.size() / 2;
  const double c0 = static_cast<double>(histogram.counts[mid]);
  G2Zero z;
  z.value = c0 / histogram.plateau_mean;
  const double rel2 = 1.0 / std::max(c0, 1.0) + 1.0 / static_cast<double>(histogram.plateau_counts);
  z.stderr_ = std::max(z.value, 1.0 / histogram.plateau_mean) * std::sqrt(rel2);
  return z;
}

double g2_zero_expected(double signal_rate, double background_rate) {
  const double total = signal_rate + background_rate;
  if (!(total > 0.0)) throw ParameterError("total rate must be positive");
  const double rho = signal_rate / total;
  return 1.0 - rho * rho;
}

void write_records_csv(std::ostream& out, const std::vector<PhotonRecord>& records) {
  out << "detector,timestamp_ns\n";
  for (const auto& r : records) {
    for (double t : r.timestamps_s) out << r.detector << ',' << fmt(t * 1e9) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const G2Histogram& histogram) {
  out << "tau_ns,counts,normalized\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << fmt(histogram.tau_s[i] * 1e9) << ',' << histogram.counts[i] << ',' << fmt(histogram.normalized[i])
        << '\n';
  }
}

}  // namespace strainsim::photonics
