#include "strainsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "strainsim/errors.hpp"

#ifndef STRAINSIM_DEFAULT_CONFIG
#define STRAINSIM_DEFAULT_CONFIG "default_device.json"
#endif

namespace strainsim::config {

namespace {

using nlohmann::json;

[[noreturn]] void single_violation(std::string pointer, std::string message) {
  throw ConfigError(std::vector<ConfigViolation>{{std::move(pointer), std::move(message)}});
}

// Collects violations instead of stopping at the first one.
class Reader {
 public:
  std::vector<ConfigViolation> violations;

  void fail(const std::string& ptr, const std::string& msg) { violations.push_back({ptr, msg}); }

  const json* field(const json& obj, const std::string& ptr, const char* key, bool required = true) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(ptr + "/" + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& obj, const std::string& ptr, const char* key, double fallback, bool required = true) {
    const json* v = field(obj, ptr, key, required);
    if (!v) return fallback;
    if (!v->is_number()) {
      fail(ptr + "/" + key, "expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  std::string string(const json& obj, const std::string& ptr, const char* key, std::string fallback = {},
                     bool required = true) {
    const json* v = field(obj, ptr, key, required);
    if (!v) return fallback;
    if (!v->is_string()) {
      fail(ptr + "/" + key, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> numbers(const json& obj, const std::string& ptr, const char* key, std::array<double, N> fallback,
                                bool required = true) {
    const json* v = field(obj, ptr, key, required);
    if (!v) return fallback;
    const std::string p = ptr + "/" + key;
    if (!v->is_array() || v->size() != N) {
      fail(p, "expected an array of " + std::to_string(N) + " numbers");
      return fallback;
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!(*v)[i].is_number()) {
        fail(p + "/" + std::to_string(i), "expected a number");
        return fallback;
      }
      out[i] = (*v)[i].get<double>();
    }
    return out;
  }

  std::optional<crystal::CrystalDirection> direction(const json& obj, const std::string& ptr, const char* key,
                                                     bool required = true) {
    const json* v = field(obj, ptr, key, required);
    if (!v) return std::nullopt;
    const std::string p = ptr + "/" + key;
    if (!v->is_array() || v->size() != 3 || !std::all_of(v->begin(), v->end(), [](const json& e) {
          return e.is_number_integer();
        })) {
      fail(p, "expected three integer Miller indices");
      return std::nullopt;
    }
    crystal::CrystalDirection d{(*v)[0].get<int>(), (*v)[1].get<int>(), (*v)[2].get<int>()};
    if (d.is_zero()) {
      fail(p, "direction must not be the zero vector");
      return std::nullopt;
    }
    return d;
  }
};

snv::SnVParams read_snv(Reader& r, const json& doc) {
  snv::SnVParams p;
  const json* s = r.field(doc, "", "snv_params");
  if (!s) return p;
  if (!s->is_object()) {
    r.fail("/snv_params", "expected an object");
    return p;
  }
  const std::string ptr = "/snv_params";
  p.lambda_g_ghz = r.number(*s, ptr, "lambda_g_ghz", p.lambda_g_ghz, false);
  p.lambda_u_ghz = r.number(*s, ptr, "lambda_u_ghz", p.lambda_u_ghz, false);
  p.t_par_g_phz = r.number(*s, ptr, "t_par_g_phz", p.t_par_g_phz, false);
  p.t_perp_g_phz = r.number(*s, ptr, "t_perp_g_phz", p.t_perp_g_phz, false);
  p.t_par_u_phz = r.number(*s, ptr, "t_par_u_phz", p.t_par_u_phz, false);
  p.t_perp_u_phz = r.number(*s, ptr, "t_perp_u_phz", p.t_perp_u_phz, false);
  p.d_g_phz = r.number(*s, ptr, "d_g_phz", p.d_g_phz, false);
  p.f_g_phz = r.number(*s, ptr, "f_g_phz", p.f_g_phz, false);
  p.d_u_phz = r.number(*s, ptr, "d_u_phz", p.d_u_phz, false);
  p.f_u_phz = r.number(*s, ptr, "f_u_phz", p.f_u_phz, false);
  p.gamma_s_ghz_per_t = r.number(*s, ptr, "gamma_s_ghz_per_t", p.gamma_s_ghz_per_t, false);
  p.gamma_l_ghz_per_t = r.number(*s, ptr, "gamma_l_ghz_per_t", p.gamma_l_ghz_per_t, false);
  p.q = r.number(*s, ptr, "q", p.q, false);
  p.prestrain_egx_ghz = r.number(*s, ptr, "prestrain_egx_ghz", p.prestrain_egx_ghz, false);
  p.prestrain_egy_ghz = r.number(*s, ptr, "prestrain_egy_ghz", p.prestrain_egy_ghz, false);
  try {
    p.validate();
  } catch (const Error& e) {
    r.fail(ptr, e.what());
  }
  return p;
}

Settings read_settings(Reader& r, const json& doc) {
  Settings s;
  const json* j = r.field(doc, "", "settings", false);
  if (!j) return s;
  const std::string ptr = "/settings";
  const std::string conv = r.string(*j, ptr, "modulation_index_convention", "as-printed", false);
  try {
    s.modulation_index_convention = spectroscopy::modulation_convention_from_string(conv);
  } catch (const Error& e) {
    r.fail(ptr + "/modulation_index_convention", e.what());
  }
  const std::string reading = r.string(*j, ptr, "prestrain_reading", "eg-magnitude", false);
  try {
    s.prestrain_reading = snv::prestrain_reading_from_string(reading);
  } catch (const Error& e) {
    r.fail(ptr + "/prestrain_reading", e.what());
  }
  if (const json* seed = r.field(*j, ptr, "seed", false)) {
    if (seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0)) {
      s.seed = seed->get<std::uint64_t>();
    } else {
      r.fail(ptr + "/seed", "expected a non-negative integer");
    }
  }
  s.poisson_ratio = r.number(*j, ptr, "poisson_ratio", s.poisson_ratio, false);
  if (!(s.poisson_ratio >= 0.0 && s.poisson_ratio < 0.5)) r.fail(ptr + "/poisson_ratio", "must lie in [0, 0.5)");
  return s;
}

std::vector<EmitterRecord> read_emitters(Reader& r, const json& doc) {
  std::vector<EmitterRecord> out;
  const json* list = r.field(doc, "", "emitters");
  if (!list) return out;
  if (!list->is_array()) {
    r.fail("/emitters", "expected an array");
    return out;
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& e = (*list)[i];
    const std::string ptr = "/emitters/" + std::to_string(i);
    if (!e.is_object()) {
      r.fail(ptr, "expected an object");
      continue;
    }
    EmitterRecord rec;
    rec.id = r.string(e, ptr, "id");
    if (!rec.id.empty() && !seen.insert(rec.id).second) r.fail(ptr + "/id", "duplicate emitter id '" + rec.id + "'");
    rec.actuator = r.string(e, ptr, "actuator");
    if (auto d = r.direction(e, ptr, "dipole")) {
      rec.dipole = *d;
      try {
        (void)crystal::classify_orientation(*d);
      } catch (const Error& err) {
        r.fail(ptr + "/dipole", err.what());
      }
    }
    rec.x_axis = r.direction(e, ptr, "x_axis", false);
    if (rec.x_axis && rec.x_axis->dot(rec.dipole) != 0) {
      r.fail(ptr + "/x_axis", "x axis is not perpendicular to the dipole");
    }
    rec.depth_nm = r.number(e, ptr, "depth_nm", 0.0, false);
    rec.depth_straggle_nm = r.number(e, ptr, "depth_straggle_nm", 0.0, false);
    rec.zpf_strain_voigt = r.numbers<6>(e, ptr, "zpf_strain_voigt", {}, false);
    out.push_back(std::move(rec));
  }
  return out;
}

actuator::ActuatorModel read_actuator(Reader& r, const json& a, const std::string& ptr) {
  actuator::ActuatorModel m;
  m.dc_deflection_gain_nm_per_v = r.number(a, ptr, "dc_deflection_gain_nm_per_v", 0.0);
  m.capacitance_f = r.number(a, ptr, "capacitance_f", m.capacitance_f);
  m.loss_factor = r.number(a, ptr, "loss_factor", m.loss_factor);
  m.leak_resistance_ohm = r.number(a, ptr, "leak_resistance_ohm", m.leak_resistance_ohm);
  m.max_voltage_v = r.number(a, ptr, "max_voltage_v", m.max_voltage_v, false);
  const json* sites = r.field(a, ptr, "sites");
  if (sites && !sites->is_object()) r.fail(ptr + "/sites", "expected an object keyed by emitter id");
  if (sites && sites->is_object()) {
    for (const auto& [id, s] : sites->items()) {
      const std::string sp = ptr + "/sites/" + id;
      actuator::SiteResponse site;
      site.dc_strain_gain_per_v = r.number(s, sp, "dc_strain_gain_per_v", 0.0);
      if (const json* modes = r.field(s, sp, "modes", false)) {
        if (!modes->is_array()) {
          r.fail(sp + "/modes", "expected an array");
        } else {
          for (std::size_t k = 0; k < modes->size(); ++k) {
            const std::string mp = sp + "/modes/" + std::to_string(k);
            const json& mj = (*modes)[k];
            actuator::MechanicalMode mode;
            mode.frequency_hz = mhz_to_hz(r.number(mj, mp, "frequency_mhz", 0.0));
            mode.quality_factor = r.number(mj, mp, "quality_factor", 1.0);
            mode.strain_gain_per_v = r.number(mj, mp, "strain_gain_per_v", 0.0);
            if (!(mode.frequency_hz > 0.0)) r.fail(mp + "/frequency_mhz", "must be positive");
            if (!(mode.quality_factor >= 1.0)) r.fail(mp + "/quality_factor", "must be >= 1");
            site.modes.push_back(mode);
          }
        }
      }
      m.sites.emplace(id, std::move(site));
    }
  }
  try {
    m.validate();
  } catch (const Error& e) {
    r.fail(ptr, e.what());
  }
  return m;
}

photonics::SwitchNetwork read_network(Reader& r, const json& doc) {
  photonics::SwitchNetwork n;
  const json* j = r.field(doc, "", "network");
  if (!j) return n;
  const std::string ptr = "/network";
  auto names = [&](const char* key) {
    std::vector<std::string> out;
    const json* v = r.field(*j, ptr, key);
    if (!v) return out;
    if (!v->is_array()) {
      r.fail(ptr + "/" + key, "expected an array of names");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) {
        r.fail(ptr + "/" + key + "/" + std::to_string(i), "expected a string");
        continue;
      }
      out.push_back((*v)[i].get<std::string>());
    }
    return out;
  };
  n.inputs = names("inputs");
  n.outputs = names("outputs");
  if (const json* els = r.field(*j, ptr, "elements")) {
    for (std::size_t i = 0; els->is_array() && i < els->size(); ++i) {
      const std::string ep = ptr + "/elements/" + std::to_string(i);
      photonics::Element e;
      e.name = r.string((*els)[i], ep, "name");
      try {
        e.kind = photonics::element_kind_from_string(r.string((*els)[i], ep, "kind", "mzi"));
      } catch (const Error& err) {
        r.fail(ep + "/kind", err.what());
      }
      if (const json* rs = r.field((*els)[i], ep, "ratios", false)) {
        if (!rs->is_array()) {
          r.fail(ep + "/ratios", "expected an array of numbers");
        } else {
          for (std::size_t k = 0; k < rs->size(); ++k) {
            if (!(*rs)[k].is_number()) {
              r.fail(ep + "/ratios/" + std::to_string(k), "expected a number");
              continue;
            }
            e.ratios.push_back((*rs)[k].get<double>());
          }
        }
      }
      n.elements.push_back(std::move(e));
    }
  }
  if (const json* edges = r.field(*j, ptr, "edges")) {
    for (std::size_t i = 0; edges->is_array() && i < edges->size(); ++i) {
      const std::string ep = ptr + "/edges/" + std::to_string(i);
      n.edges.push_back({r.string((*edges)[i], ep, "from"), r.string((*edges)[i], ep, "to")});
    }
  }
  if (const json* ph = r.field(*j, ptr, "phases", false)) {
    for (const auto& [k, v] : ph->items()) {
      if (!v.is_number()) {
        r.fail(ptr + "/phases/" + k, "expected a number (radians)");
        continue;
      }
      n.phases[k] = v.get<double>();
    }
  }
  for (const auto& k : n.phase_keys()) n.phases.try_emplace(k, 0.0);
  try {
    n.validate();
  } catch (const Error& e) {
    r.fail(ptr, e.what());
  }
  return n;
}

SpinSettings read_spin(Reader& r, const json& doc) {
  SpinSettings s;
  const json* j = r.field(doc, "", "spin");
  if (!j) return s;
  const std::string ptr = "/spin";
  s.emitter = r.string(*j, ptr, "emitter");
  s.prestrain_ghz = r.number(*j, ptr, "prestrain_ghz", s.prestrain_ghz);
  s.field_tesla = r.numbers<3>(*j, ptr, "field_tesla", s.field_tesla);
  s.g_sm_hz = r.number(*j, ptr, "g_sm_hz", s.g_sm_hz);
  s.init_fidelity = r.number(*j, ptr, "init_fidelity", s.init_fidelity, false);
  s.readout_contrast = r.number(*j, ptr, "readout_contrast", s.readout_contrast, false);
  s.baseline_counts = r.number(*j, ptr, "baseline_counts", s.baseline_counts, false);
  s.pulse_duration_ns = r.number(*j, ptr, "pulse_duration_ns", s.pulse_duration_ns, false);
  s.phonon_number = r.number(*j, ptr, "phonon_number", s.phonon_number, false);
  if (!(s.init_fidelity >= 0.0 && s.init_fidelity <= 1.0)) r.fail(ptr + "/init_fidelity", "must lie in [0, 1]");
  if (!(s.pulse_duration_ns > 0.0)) r.fail(ptr + "/pulse_duration_ns", "must be positive");
  if (!(s.phonon_number >= 0.0)) r.fail(ptr + "/phonon_number", "must be non-negative");
  return s;
}

json direction_json(const crystal::CrystalDirection& d) { return json::array({d.h, d.k, d.l}); }

}  // namespace

crystal::SnVOrientation EmitterRecord::orientation() const {
  crystal::SnVOrientation o = crystal::classify_orientation(dipole);
  if (x_axis) o.x_axis = *x_axis;
  return o;
}

crystal::StrainTensor EmitterRecord::zpf_strain() const {
  return crystal::StrainTensor::from_voigt(zpf_strain_voigt, orientation().frame());
}

const EmitterRecord& DeviceConfig::emitter(std::string_view id) const {
  for (const auto& e : emitters) {
    if (e.id == id) return e;
  }
  throw SiteNotFoundError("no emitter '" + std::string(id) + "' in the device config");
}

std::filesystem::path DeviceConfig::data_path(std::string_view key) const {
  const auto it = data_files.find(key);
  if (it == data_files.end()) single_violation("/data_files/" + std::string(key), "no such data file entry");
  const std::filesystem::path p(it->second);
  return p.is_absolute() ? p : base_dir / p;
}

DeviceConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) single_violation("", "config root must be a JSON object");
  const auto v = doc.find("version");
  if (v == doc.end() || !v->is_number_integer()) single_violation("/version", "missing integer version");
  if (v->get<int>() != kConfigVersion) {
    throw VersionError("config version " + std::to_string(v->get<int>()) + " is not supported (expected " +
                       std::to_string(kConfigVersion) + ")");
  }

  Reader r;
  DeviceConfig c;
  c.base_dir = base_dir;
  c.snv = read_snv(r, doc);
  c.settings = read_settings(r, doc);
  c.emitters = read_emitters(r, doc);

  if (const json* acts = r.field(doc, "", "actuators")) {
    if (!acts->is_object()) {
      r.fail("/actuators", "expected an object keyed by actuator id");
    } else {
      for (const auto& [id, a] : acts->items()) c.actuators.emplace(id, read_actuator(r, a, "/actuators/" + id));
    }
  }

  // Cross references between emitters and actuator sites.
  for (std::size_t i = 0; i < c.emitters.size(); ++i) {
    const auto& e = c.emitters[i];
    const std::string ptr = "/emitters/" + std::to_string(i) + "/actuator";
    const auto it = c.actuators.find(e.actuator);
    if (it == c.actuators.end()) {
      r.fail(ptr, "emitter '" + e.id + "' references missing actuator '" + e.actuator + "'");
    } else if (!it->second.sites.count(e.id)) {
      r.fail(ptr, "actuator '" + e.actuator + "' has no site for emitter '" + e.id + "'");
    }
  }
  for (const auto& [aid, a] : c.actuators) {
    for (const auto& [sid, s] : a.sites) {
      const bool known = std::any_of(c.emitters.begin(), c.emitters.end(), [&](const auto& e) { return e.id == sid; });
      if (!known) r.fail("/actuators/" + aid + "/sites/" + sid, "site '" + sid + "' names no emitter");
    }
  }

  c.network = read_network(r, doc);

  if (const json* z = r.field(doc, "", "zpf_fixtures", false)) {
    for (const auto& [k, val] : z->items()) {
      c.zpf_fixtures[k] = r.numbers<6>(*z, "/zpf_fixtures", k.c_str(), {});
    }
  }
  if (const json* files = r.field(doc, "", "data_files", false)) {
    for (const auto& [k, val] : files->items()) {
      if (!val.is_string()) {
        r.fail("/data_files/" + k, "expected a path string");
        continue;
      }
      c.data_files[k] = val.get<std::string>();
    }
  }
  c.spin = read_spin(r, doc);
  if (!c.spin.emitter.empty() &&
      std::none_of(c.emitters.begin(), c.emitters.end(), [&](const auto& e) { return e.id == c.spin.emitter; })) {
    r.fail("/spin/emitter", "spin emitter '" + c.spin.emitter + "' is not defined");
  }
  if (const json* sc = r.field(doc, "", "scenarios", false)) {
    if (!sc->is_object()) {
      r.fail("/scenarios", "expected an object keyed by scenario name");
    } else {
      c.scenarios = *sc;
    }
  }
  if (!r.violations.empty()) throw ConfigError(std::move(r.violations));
  return c;
}

nlohmann::json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) single_violation("", "cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    single_violation("", std::string("malformed JSON: ") + e.what());
  }
}

DeviceConfig load_config(const std::filesystem::path& path) { return parse_config(read_config_json(path), path.parent_path()); }

DeviceConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  json doc = read_config_json(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.parent_path());
}

nlohmann::json to_json(const DeviceConfig& c) {
  json doc;
  doc["version"] = c.version;
  const auto& p = c.snv;
  doc["snv_params"] = {
      {"lambda_g_ghz", p.lambda_g_ghz},   {"lambda_u_ghz", p.lambda_u_ghz},
      {"t_par_g_phz", p.t_par_g_phz},     {"t_perp_g_phz", p.t_perp_g_phz},
      {"t_par_u_phz", p.t_par_u_phz},     {"t_perp_u_phz", p.t_perp_u_phz},
      {"d_g_phz", p.d_g_phz},             {"f_g_phz", p.f_g_phz},
      {"d_u_phz", p.d_u_phz},             {"f_u_phz", p.f_u_phz},
      {"gamma_s_ghz_per_t", p.gamma_s_ghz_per_t}, {"gamma_l_ghz_per_t", p.gamma_l_ghz_per_t},
      {"q", p.q},                         {"prestrain_egx_ghz", p.prestrain_egx_ghz},
      {"prestrain_egy_ghz", p.prestrain_egy_ghz},
  };
  doc["settings"] = {
      {"modulation_index_convention", spectroscopy::to_string(c.settings.modulation_index_convention)},
      {"prestrain_reading", snv::to_string(c.settings.prestrain_reading)},
      {"seed", c.settings.seed},
      {"poisson_ratio", c.settings.poisson_ratio},
  };
  doc["emitters"] = json::array();
  for (const auto& e : c.emitters) {
    json je = {{"id", e.id},
               {"actuator", e.actuator},
               {"dipole", direction_json(e.dipole)},
               {"depth_nm", e.depth_nm},
               {"depth_straggle_nm", e.depth_straggle_nm},
               {"zpf_strain_voigt", e.zpf_strain_voigt}};
    if (e.x_axis) je["x_axis"] = direction_json(*e.x_axis);
    doc["emitters"].push_back(std::move(je));
  }
  doc["actuators"] = json::object();
  for (const auto& [id, a] : c.actuators) {
    json ja = {{"dc_deflection_gain_nm_per_v", a.dc_deflection_gain_nm_per_v},
               {"capacitance_f", a.capacitance_f},
               {"loss_factor", a.loss_factor},
               {"leak_resistance_ohm", a.leak_resistance_ohm},
               {"max_voltage_v", a.max_voltage_v},
               {"sites", json::object()}};
    for (const auto& [sid, s] : a.sites) {
      json js = {{"dc_strain_gain_per_v", s.dc_strain_gain_per_v}, {"modes", json::array()}};
      for (const auto& m : s.modes) {
        js["modes"].push_back({{"frequency_mhz", m.frequency_hz / 1e6},
                               {"quality_factor", m.quality_factor},
                               {"strain_gain_per_v", m.strain_gain_per_v}});
      }
      ja["sites"][sid] = std::move(js);
    }
    doc["actuators"][id] = std::move(ja);
  }
  json net = {{"inputs", c.network.inputs}, {"outputs", c.network.outputs}, {"elements", json::array()},
              {"edges", json::array()}, {"phases", c.network.phases}};
  for (const auto& e : c.network.elements) {
    net["elements"].push_back({{"name", e.name}, {"kind", photonics::to_string(e.kind)}, {"ratios", e.ratios}});
  }
  for (const auto& e : c.network.edges) net["edges"].push_back({{"from", e.from}, {"to", e.to}});
  doc["network"] = std::move(net);
  doc["zpf_fixtures"] = json::object();
  for (const auto& [k, v] : c.zpf_fixtures) doc["zpf_fixtures"][k] = v;
  doc["data_files"] = json::object();
  for (const auto& [k, v] : c.data_files) doc["data_files"][k] = v;
  const auto& s = c.spin;
  doc["spin"] = {{"emitter", s.emitter},
                 {"prestrain_ghz", s.prestrain_ghz},
                 {"field_tesla", s.field_tesla},
                 {"g_sm_hz", s.g_sm_hz},
                 {"init_fidelity", s.init_fidelity},
                 {"readout_contrast", s.readout_contrast},
                 {"baseline_counts", s.baseline_counts},
                 {"pulse_duration_ns", s.pulse_duration_ns},
                 {"phonon_number", s.phonon_number}};
  doc["scenarios"] = c.scenarios;
  return doc;
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("override '" + std::string(assignment) + "' is not of the form key.path=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw UsageError("override path '" + path + "' has an empty segment");
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw UsageError("override path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= node->size()) throw UsageError("override path '" + path + "': index " + key + " out of range");
      next = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      next = &(*node)[key];
    } else {
      throw UsageError("override path '" + path + "' descends into a scalar at '" + key + "'");
    }
    node = next;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

std::filesystem::path default_config_path() {
  if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) return env;
  return STRAINSIM_DEFAULT_CONFIG;
}

}  // namespace strainsim::config
