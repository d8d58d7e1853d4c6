#pragma once

// 2x2 transfer matrices for couplers, phase shifters and (double) cantilever
// phase-shifter MZIs, a port-level DAG composer, and the extinction optimizer.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace strainsim::photonics {

/// m(out, in): field amplitude from input port `in` to output port `out`.
using TransferMatrix = Eigen::Matrix2cd;

/// [[sqrt(1-r), i sqrt(r)], [i sqrt(r), sqrt(1-r)]]; r is the power sent to the cross port.
TransferMatrix coupler(double ratio);
TransferMatrix phase_shifter(double theta);
/// coupler(r2) * phase_shifter(theta) * coupler(r1)
TransferMatrix mzi(double theta, double r1, double r2);
/// mzi(phi, r3, r4) * mzi(theta, r1, r2)
TransferMatrix dcps_mzi(double theta, double phi, const std::array<double, 4>& ratios);

double unitarity_error(const Eigen::MatrixXcd& m);
double max_singular_value(const Eigen::MatrixXcd& m);

enum class ElementKind { coupler, phase, mzi, dcps };

std::string_view to_string(ElementKind kind);
ElementKind element_kind_from_string(std::string_view name);

/// Ports are addressed as "<element>.in0", "<element>.in1", "<element>.out0", "<element>.out1".
/// Phases live in the network's phase map under "<element>.theta" (and "<element>.phi" for dcps).
struct Element {
  std::string name;
  ElementKind kind = ElementKind::mzi;
  std::vector<double> ratios;  // coupler: 1, mzi: 2, dcps: 4, phase: 0

  /// Phase keys this element reads, in order.
  std::vector<std::string> phase_keys() const;
  TransferMatrix transfer(const std::map<std::string, double>& phases) const;
};

struct Edge {
  std::string from;  // network input or element output port
  std::string to;    // element input port or network output
};

struct SwitchNetwork {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  std::map<std::string, double> phases;

  /// Throws TopologyError on unknown or dangling ports, double connections or cycles,
  /// and RatioDomainError on coupler ratios outside [0, 1].
  void validate() const;

  /// All phase keys in element order.
  std::vector<std::string> phase_keys() const;

  /// T(out, in) over the declared outputs and inputs.
  Eigen::MatrixXcd transfer() const;

  std::size_t input_index(std::string_view name) const;
  std::size_t output_index(std::string_view name) const;
};

/// Two dCPS-MZIs ("s1": ch1/ch2, "s2": ch3/ch4) feed the final cps-MZI "f" with outputs A/B.
/// Unused dCPS outputs end in "drop1"/"drop2".
SwitchNetwork four_by_one_switch(const std::array<double, 4>& s1_ratios = {0.5, 0.5, 0.5, 0.5},
                                 const std::array<double, 4>& s2_ratios = {0.5, 0.5, 0.5, 0.5},
                                 const std::array<double, 2>& final_ratios = {0.5, 0.5});

/// A network holding one element between inputs in0/in1 and outputs out0/out1.
SwitchNetwork single_element_network(const Element& element);

struct ExtinctionResult {
  std::map<std::string, double> phases;  // dark setting
  double extinction_db = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
};

struct ExtinctionOptions {
  std::vector<std::string> phase_keys;  // empty: every phase of the network
  int grid_points = 64;                 // per phase for the coarse scan
  std::optional<double> min_extinction_db;
  double power_floor = 1e-30;  // keeps the dB figure finite for exact nulls
};

/// Minimizes |T(target, dark)|^2 over the chosen phases (coarse grid then Nelder-Mead),
/// and likewise maximizes it; extinction = 10 log10(p_max / p_min).
/// Throws OptimizationShortfallError if `min_extinction_db` is set and not reached.
ExtinctionResult optimize_extinction(const SwitchNetwork& network, std::string_view target_output,
                                     std::string_view dark_input, const ExtinctionOptions& options = {});

}  // namespace strainsim::photonics
