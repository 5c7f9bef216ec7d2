#include "qotto/scenario.hpp"

#include <toml.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qotto/error.hpp"

namespace qotto {

namespace {

Json from_toml(const toml::node& node, const std::string& path) {
  if (auto t = node.as_table()) {
    Json out = Json::object();
    for (const auto& [k, v] : *t) {
      const std::string key(k.str());
      out[key] = from_toml(v, path.empty() ? key : path + "." + key);
    }
    return out;
  }
  if (auto a = node.as_array()) {
    Json out = Json::array();
    for (std::size_t i = 0; i < a->size(); ++i)
      out.push_back(from_toml((*a)[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_string()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  throw ConfigError(path + ": unsupported value type (dates and times are not accepted)");
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

class Section {
 public:
  Section(const Json& doc, std::string path) : path_(std::move(path)) {
    if (doc.is_null()) {
      doc_ = Json::object();
      return;
    }
    if (!doc.is_object()) throw ConfigError(path_ + ": expected a table");
    doc_ = doc;
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  double number(const std::string& key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) throw ConfigError(join(path_, key) + ": required key missing");
    if (!it->is_number()) throw ConfigError(join(path_, key) + ": expected a number");
    return it->get<double>();
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (seen_.insert(key), fallback);
  }

  long long integer(const std::string& key, long long fallback) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return fallback;
    if (!it->is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
    return it->get<long long>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return fallback;
    if (!it->is_string()) throw ConfigError(join(path_, key) + ": expected a string");
    return it->get<std::string>();
  }

  Section child(const std::string& key, bool required) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) {
      if (required) throw ConfigError(join(path_, key) + ": required table missing");
      return Section(Json(), join(path_, key));
    }
    return Section(*it, join(path_, key));
  }

  // Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [k, v] : doc_.items())
      if (!seen_.count(k)) throw ConfigError(join(path_, k) + ": unknown key");
  }

  std::string key_path(const std::string& key) const { return join(path_, key); }

 private:
  Json doc_;
  std::string path_;
  std::set<std::string> seen_;
};

double positive(Section& sec, const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << sec.key_path(key) << ": must be a positive finite number, got " << v;
    throw ConfigError(os.str());
  }
  return v;
}

BathSpec read_bath(Section sec, double omega) {
  BathSpec b;
  b.temperature = positive(sec, "temperature", sec.number("temperature"));
  b.spectral.gamma = positive(sec, "gamma", sec.number("gamma"));
  b.spectral.lambda = positive(sec, "lambda", sec.number("lambda", 4.0 * omega));
  try {
    b.model = parse_dynamics_model(sec.text("model", "tcl2"));
  } catch (const InvalidParameter& e) {
    throw ConfigError(sec.key_path("model") + ": " + e.what());
  }
  sec.finish();
  return b;
}

Json bath_to_json(const BathSpec& b) {
  Json j;
  j["temperature"] = b.temperature;
  j["gamma"] = b.spectral.gamma;
  j["lambda"] = b.spectral.lambda;
  j["model"] = std::string(to_string(b.model));
  return j;
}

Json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json parse_document(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
  }
  try {
    const toml::table t = toml::parse(text);
    return from_toml(t, "");
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error at line " << e.source().begin.line << ", column "
       << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
}

OttoScenario scenario_from_json(const Json& doc) {
  Section root(doc, "");
  Section sys = root.child("system", true);
  const double omega_h = positive(sys, "omega_h", sys.number("omega_h"));
  const double omega_c = positive(sys, "omega_c", sys.number("omega_c"));
  sys.finish();
  if (!(omega_c < omega_h)) {
    std::ostringstream os;
    os << "system: omega_c (" << omega_c << ") must be smaller than omega_h (" << omega_h << ")";
    throw ConfigError(os.str());
  }

  const BathSpec hot = read_bath(root.child("hot_bath", true), omega_h);
  const BathSpec cold = read_bath(root.child("cold_bath", true), omega_c);
  if (cold.temperature > hot.temperature) {
    std::ostringstream os;
    os << "cold_bath.temperature (" << cold.temperature
       << ") must not exceed hot_bath.temperature (" << hot.temperature << ")";
    throw ConfigError(os.str());
  }

  OttoScenario s = OttoScenario::with_defaults(omega_h, omega_c, hot, cold);

  Section integ = root.child("integration", false);
  s.integrator.dt = positive(integ, "dt", integ.number("dt", s.integrator.dt));
  s.integrator.t_max = positive(integ, "t_max", integ.number("t_max", s.integrator.t_max));
  s.integrator.quad.abs_tol =
      positive(integ, "quad_abs_tol", integ.number("quad_abs_tol", s.integrator.quad.abs_tol));
  s.integrator.quad.rel_tol =
      positive(integ, "quad_rel_tol", integ.number("quad_rel_tol", s.integrator.quad.rel_tol));
  const long long subdiv = integ.integer("max_subdivisions", s.integrator.quad.max_subdivisions);
  if (subdiv < 1 || subdiv > 10'000'000)
    throw ConfigError("integration.max_subdivisions: must be in [1, 10000000]");
  s.integrator.quad.max_subdivisions = static_cast<int>(subdiv);
  const long long every = integ.integer("sample_every", s.integrator.sample_every);
  if (every < 1 || every > 1'000'000)
    throw ConfigError("integration.sample_every: must be in [1, 1000000]");
  s.integrator.sample_every = static_cast<int>(every);
  integ.finish();

  Section cross = root.child("crossing", false);
  // scan_dt follows dt unless given.
  s.crossing.scan_dt = positive(cross, "scan_dt", cross.number("scan_dt", s.integrator.dt));
  s.crossing.bisect_tol =
      positive(cross, "bisect_tol", cross.number("bisect_tol", s.crossing.bisect_tol));
  cross.finish();
  root.finish();

  try {
    s.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  return s;
}

OttoScenario parse_scenario(std::string_view text) { return scenario_from_json(parse_document(text)); }

OttoScenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Json scenario_to_json(const OttoScenario& s) {
  Json j;
  j["system"]["omega_h"] = s.omega_h;
  j["system"]["omega_c"] = s.omega_c;
  j["hot_bath"] = bath_to_json(s.hot);
  j["cold_bath"] = bath_to_json(s.cold);
  j["integration"]["dt"] = s.integrator.dt;
  j["integration"]["t_max"] = s.integrator.t_max;
  j["integration"]["quad_abs_tol"] = s.integrator.quad.abs_tol;
  j["integration"]["quad_rel_tol"] = s.integrator.quad.rel_tol;
  j["integration"]["max_subdivisions"] = s.integrator.quad.max_subdivisions;
  j["integration"]["sample_every"] = s.integrator.sample_every;
  j["crossing"]["scan_dt"] = s.crossing.scan_dt;
  j["crossing"]["bisect_tol"] = s.crossing.bisect_tol;
  return j;
}

bool operator==(const OttoScenario& a, const OttoScenario& b) {
  return a.omega_h == b.omega_h && a.omega_c == b.omega_c && a.hot == b.hot && a.cold == b.cold &&
         a.integrator.dt == b.integrator.dt && a.integrator.t_max == b.integrator.t_max &&
         a.integrator.sample_every == b.integrator.sample_every &&
         a.integrator.quad.abs_tol == b.integrator.quad.abs_tol &&
         a.integrator.quad.rel_tol == b.integrator.quad.rel_tol &&
         a.integrator.quad.max_subdivisions == b.integrator.quad.max_subdivisions &&
         a.crossing.scan_dt == b.crossing.scan_dt && a.crossing.bisect_tol == b.crossing.bisect_tol;
}

Json to_json(const CarnotReport& c) {
  Json j;
  j["q_h_c"] = c.q_h_c;
  j["q_c_c"] = c.q_c_c;
  j["w_c"] = c.w_c;
  j["eta_c"] = c.eta_c;
  j["omega_h_prime"] = c.omega_h_prime;
  j["omega_c_prime"] = c.omega_c_prime;
  j["k_h"] = c.k_h;
  j["k_c"] = c.k_c;
  j["q_h_c_log_odds"] = c.q_h_c_log_odds;
  j["q_c_c_log_odds"] = c.q_c_c_log_odds;
  return j;
}

Json to_json(const CycleReport& r, const std::optional<CarnotReport>& carnot) {
  Json j;
  auto val = [](double v) { return finite_or_null(v); };
  j["tau1"] = optional_number(r.tau1);
  j["tau2"] = optional_number(r.tau2);
  j["q_h"] = val(r.q_h);
  j["q_c"] = val(r.q_c);
  j["w"] = val(r.w);
  j["eta"] = val(r.eta);
  j["cost_h"] = finite_or_null(r.cost_h);
  j["cost_c"] = finite_or_null(r.cost_c);
  j["q_h_tilde"] = val(r.q_h_tilde);
  j["q_c_tilde"] = val(r.q_c_tilde);
  j["w_tilde"] = val(r.w_tilde);
  j["eta_tilde"] = val(r.eta_tilde);
  j["delta_s_v"] = val(r.delta_s_v);
  j["eta_carnot"] = carnot ? Json(carnot->eta_c) : Json(nullptr);
  j["engine_condition_met"] = r.engine_condition_met;
  j["carnot"] = carnot ? to_json(*carnot) : Json(nullptr);
  j["w1"] = val(r.w1);
  j["w2"] = val(r.w2);
  j["delta_s_tot_hot"] = val(r.delta_s_tot_hot);
  j["delta_s_tot_hot_tilde"] = val(r.delta_s_tot_hot_tilde);
  j["t_h_prime"] = optional_number(r.t_h_prime);
  j["t_c_prime"] = optional_number(r.t_c_prime);
  j["t_h_double_prime"] = optional_number(r.t_h_double_prime);
  j["t_c_double_prime"] = optional_number(r.t_c_double_prime);
  j["eta_from_temperatures"] = optional_number(r.eta_from_temperatures);
  j["crossings_found"] = r.crossings_found;
  j["degenerate"] = r.degenerate;
  j["crossing_residual_hot"] = finite_or_null(r.crossing_residual_hot);
  j["crossing_residual_cold"] = finite_or_null(r.crossing_residual_cold);
  j["stage3_start_snapped"] = r.stage3_start_snapped;
  j["diagnostic"] = r.diagnostic;
  return j;
}

Json to_json(const TwoStepReport& t) {
  Json j;
  j["delta_F"] = t.delta_F;
  j["isothermal_heat"] = t.isothermal_heat;
  j["isothermal_work"] = t.isothermal_work;
  j["adiabatic_work"] = t.adiabatic_work;
  j["total_work"] = t.total_work;
  j["omega_intermediate"] = t.omega_intermediate;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& opts) {
  os << "t,sigma_z,x_ratio,T_eff,rel_entropy_to_eq,von_neumann_entropy";
  if (opts.reference_columns) os << ",x_hot_eq,x_cold_eq";
  os << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double x = traj.x_ratio[i];
    double t_eff = std::nan("");
    if (!std::isnan(x)) t_eff = x == 0.0 ? INFINITY : traj.omega / x;
    os << format_number(traj.times[i]) << ',' << format_number(traj.sigma_z[i]) << ','
       << format_number(x) << ',' << format_number(t_eff) << ','
       << format_number(traj.rel_entropy_to_eq[i]) << ',' << format_number(traj.s_von_neumann[i]);
    if (opts.reference_columns)
      os << ',' << format_number(opts.x_hot_eq) << ',' << format_number(opts.x_cold_eq);
    os << "\n";
  }
}

void set_path(Json& doc, const std::string& path, const Json& value) {
  if (path.empty()) throw ConfigError("empty parameter path");
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("malformed parameter path '" + path + "'");
    if (!node->is_object()) throw ConfigError("parameter path '" + path + "' crosses a non-table");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

}  // namespace qotto
