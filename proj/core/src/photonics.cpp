#include "strainsim/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include <Eigen/SVD>

#include "strainsim/errors.hpp"

namespace strainsim::photonics {

namespace {

using cd = std::complex<double>;

std::size_t expected_ratio_count(ElementKind kind) {
  switch (kind) {
    case ElementKind::coupler: return 1;
    case ElementKind::phase: return 0;
    case ElementKind::mzi: return 2;
    case ElementKind::dcps: return 4;
  }
  return 0;
}

double phase_or_zero(const std::map<std::string, double>& phases, const std::string& key) {
  const auto it = phases.find(key);
  return it == phases.end() ? 0.0 : it->second;
}

std::pair<std::string, int> split_port(const std::string& port) {
  const auto dot = port.rfind('.');
  if (dot == std::string::npos) return {port, -1};
  return {port.substr(0, dot), 0};
}

}  // namespace

TransferMatrix coupler(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw RatioDomainError("coupler ratio " + std::to_string(ratio) + " outside [0, 1]");
  }
  const double t = std::sqrt(1.0 - ratio);
  const double k = std::sqrt(ratio);
  TransferMatrix m;
  m << cd(t, 0), cd(0, k),
       cd(0, k), cd(t, 0);
  return m;
}

TransferMatrix phase_shifter(double theta) {
  TransferMatrix m = TransferMatrix::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = std::polar(1.0, theta);
  return m;
}

TransferMatrix mzi(double theta, double r1, double r2) { return coupler(r2) * phase_shifter(theta) * coupler(r1); }

TransferMatrix dcps_mzi(double theta, double phi, const std::array<double, 4>& ratios) {
  return mzi(phi, ratios[2], ratios[3]) * mzi(theta, ratios[0], ratios[1]);
}

double unitarity_error(const Eigen::MatrixXcd& m) {
  return (m.adjoint() * m - Eigen::MatrixXcd::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

double max_singular_value(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::coupler: return "coupler";
    case ElementKind::phase: return "phase";
    case ElementKind::mzi: return "mzi";
    case ElementKind::dcps: return "dcps";
  }
  return "unknown";
}

ElementKind element_kind_from_string(std::string_view name) {
  if (name == "coupler") return ElementKind::coupler;
  if (name == "phase") return ElementKind::phase;
  if (name == "mzi") return ElementKind::mzi;
  if (name == "dcps") return ElementKind::dcps;
  throw TopologyError("unknown element kind '" + std::string(name) + "'");
}

std::vector<std::string> Element::phase_keys() const {
  switch (kind) {
    case ElementKind::coupler: return {};
    case ElementKind::phase:
    case ElementKind::mzi: return {name + ".theta"};
    case ElementKind::dcps: return {name + ".theta", name + ".phi"};
  }
  return {};
}

TransferMatrix Element::transfer(const std::map<std::string, double>& phases) const {
  if (ratios.size() != expected_ratio_count(kind)) {
    throw TopologyError("element " + name + " (" + std::string(to_string(kind)) + ") needs " +
                        std::to_string(expected_ratio_count(kind)) + " coupler ratios, got " +
                        std::to_string(ratios.size()));
  }
  switch (kind) {
    case ElementKind::coupler: return coupler(ratios[0]);
    case ElementKind::phase: return phase_shifter(phase_or_zero(phases, name + ".theta"));
    case ElementKind::mzi: return mzi(phase_or_zero(phases, name + ".theta"), ratios[0], ratios[1]);
    case ElementKind::dcps:
      return dcps_mzi(phase_or_zero(phases, name + ".theta"), phase_or_zero(phases, name + ".phi"),
                      {ratios[0], ratios[1], ratios[2], ratios[3]});
  }
  return TransferMatrix::Identity();
}

void SwitchNetwork::validate() const {
  std::set<std::string> names;
  for (const auto& e : elements) {
    if (!names.insert(e.name).second) throw TopologyError("duplicate element name '" + e.name + "'");
    if (e.ratios.size() != expected_ratio_count(e.kind)) {
      throw TopologyError("element " + e.name + " has " + std::to_string(e.ratios.size()) + " ratios, expected " +
                          std::to_string(expected_ratio_count(e.kind)));
    }
    for (double r : e.ratios) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw RatioDomainError("element " + e.name + ": coupler ratio " + std::to_string(r) + " outside [0, 1]");
      }
    }
  }
  const std::set<std::string> in_set(inputs.begin(), inputs.end());
  const std::set<std::string> out_set(outputs.begin(), outputs.end());
  if (in_set.size() != inputs.size()) throw TopologyError("duplicate network input name");
  if (out_set.size() != outputs.size()) throw TopologyError("duplicate network output name");

  std::set<std::string> sources, sinks;
  for (const auto& e : elements) {
    sinks.insert(e.name + ".in0");
    sinks.insert(e.name + ".in1");
    sources.insert(e.name + ".out0");
    sources.insert(e.name + ".out1");
  }
  sources.insert(inputs.begin(), inputs.end());
  sinks.insert(outputs.begin(), outputs.end());

  std::map<std::string, int> used_from, used_to;
  for (const auto& edge : edges) {
    if (!sources.count(edge.from)) throw TopologyError("edge starts at unknown port '" + edge.from + "'");
    if (!sinks.count(edge.to)) throw TopologyError("edge ends at unknown port '" + edge.to + "'");
    if (++used_from[edge.from] > 1) throw TopologyError("port '" + edge.from + "' drives more than one edge");
    if (++used_to[edge.to] > 1) throw TopologyError("port '" + edge.to + "' is driven more than once");
  }
  for (const auto& s : sources) {
    if (!used_from.count(s)) throw TopologyError("dangling port '" + s + "' has no outgoing edge");
  }
  for (const auto& s : sinks) {
    if (!used_to.count(s)) throw TopologyError("dangling port '" + s + "' is never driven");
  }
  (void)transfer();  // cycle detection happens during ordering
}

std::vector<std::string> SwitchNetwork::phase_keys() const {
  std::vector<std::string> out;
  for (const auto& e : elements) {
    for (auto& k : e.phase_keys()) out.push_back(std::move(k));
  }
  return out;
}

std::size_t SwitchNetwork::input_index(std::string_view name) const {
  const auto it = std::find(inputs.begin(), inputs.end(), name);
  if (it == inputs.end()) throw TopologyError("no network input '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - inputs.begin());
}

std::size_t SwitchNetwork::output_index(std::string_view name) const {
  const auto it = std::find(outputs.begin(), outputs.end(), name);
  if (it == outputs.end()) throw TopologyError("no network output '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - outputs.begin());
}

Eigen::MatrixXcd SwitchNetwork::transfer() const {
  // Map each sink port to the source port that feeds it.
  std::map<std::string, std::string> feed;
  for (const auto& edge : edges) feed[edge.to] = edge.from;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < elements.size(); ++i) index[elements[i].name] = i;

  // Kahn ordering over element-to-element dependencies.
  std::vector<int> pending(elements.size(), 0);
  std::vector<std::vector<std::size_t>> downstream(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (const char* port : {".in0", ".in1"}) {
      const auto it = feed.find(elements[i].name + port);
      if (it == feed.end()) throw TopologyError("dangling port '" + elements[i].name + port + "' is never driven");
      const auto [owner, tag] = split_port(it->second);
      if (tag < 0) continue;  // network input
      const auto up = index.find(owner);
      if (up == index.end()) throw TopologyError("edge starts at unknown port '" + it->second + "'");
      ++pending[i];
      downstream[up->second].push_back(i);
    }
  }
  std::vector<std::size_t> order, ready;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (pending[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const std::size_t i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (std::size_t d : downstream[i])
      if (--pending[d] == 0) ready.push_back(d);
  }
  if (order.size() != elements.size()) throw TopologyError("network graph contains a cycle");

  std::vector<TransferMatrix> mats;
  mats.reserve(elements.size());
  for (const auto& e : elements) mats.push_back(e.transfer(phases));

  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(outputs.size()),
                                              static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t col = 0; col < inputs.size(); ++col) {
    std::map<std::string, cd> amp;  // amplitude at every source port
    for (std::size_t j = 0; j < inputs.size(); ++j) amp[inputs[j]] = j == col ? 1.0 : 0.0;
    for (std::size_t i : order) {
      const auto& e = elements[i];
      Eigen::Vector2cd in(amp.at(feed.at(e.name + ".in0")), amp.at(feed.at(e.name + ".in1")));
      const Eigen::Vector2cd out = mats[i] * in;
      amp[e.name + ".out0"] = out(0);
      amp[e.name + ".out1"] = out(1);
    }
    for (std::size_t row = 0; row < outputs.size(); ++row) {
      const auto it = feed.find(outputs[row]);
      if (it == feed.end()) throw TopologyError("dangling output '" + outputs[row] + "'");
      t(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = amp.at(it->second);
    }
  }
  return t;
}

SwitchNetwork four_by_one_switch(const std::array<double, 4>& s1_ratios, const std::array<double, 4>& s2_ratios,
                                 const std::array<double, 2>& final_ratios) {
  SwitchNetwork n;
  n.inputs = {"ch1", "ch2", "ch3", "ch4"};
  n.outputs = {"A", "B", "drop1", "drop2"};
  n.elements = {
      {"s1", ElementKind::dcps, {s1_ratios.begin(), s1_ratios.end()}},
      {"s2", ElementKind::dcps, {s2_ratios.begin(), s2_ratios.end()}},
      {"f", ElementKind::mzi, {final_ratios.begin(), final_ratios.end()}},
  };
  n.edges = {
      {"ch1", "s1.in0"}, {"ch2", "s1.in1"}, {"ch3", "s2.in0"}, {"ch4", "s2.in1"},
      {"s1.out0", "f.in0"}, {"s2.out0", "f.in1"},
      {"s1.out1", "drop1"}, {"s2.out1", "drop2"},
      {"f.out0", "A"}, {"f.out1", "B"},
  };
  for (const auto& k : n.phase_keys()) n.phases[k] = 0.0;
  return n;
}

SwitchNetwork single_element_network(const Element& element) {
  SwitchNetwork n;
  n.inputs = {"in0", "in1"};
  n.outputs = {"out0", "out1"};
  n.elements = {element};
  n.edges = {{"in0", element.name + ".in0"},
             {"in1", element.name + ".in1"},
             {element.name + ".out0", "out0"},
             {element.name + ".out1", "out1"}};
  for (const auto& k : n.phase_keys()) n.phases[k] = 0.0;
  return n;
}

}  // namespace strainsim::photonics
