#include "qotto/commands.hpp"

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "qotto/error.hpp"

namespace qotto {

namespace {

bool weak_coupling_advisory(const OttoScenario& s) {
  return s.hot.spectral.weak_coupling_advisory() || s.cold.spectral.weak_coupling_advisory();
}

std::string advisory_message(const OttoScenario& s) {
  if (!weak_coupling_advisory(s)) return {};
  std::ostringstream os;
  os << "warning: gamma above " << SpectralDensity::kWeakCouplingLimit
     << "; the second-order rates assume weak coupling";
  return os.str();
}

template <class F>
CommandResult guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return CommandResult{exit_code_for(e), {}, e.what()};
  }
}

std::string value_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '+' || c == '_' || c == '=';
    out += ok ? c : '_';
  }
  return out;
}

std::string csv_field(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return format_number(v.get<double>());
  std::string s = value_text(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e))
    return kExitConfig;
  if (dynamic_cast<const NoCrossing*>(&e) || dynamic_cast<const UndefinedTemperature*>(&e))
    return kExitInfeasible;
  return kExitNumerical;
}

void apply_quad_tol_override(OttoScenario& s, const char* env_value) {
  if (!env_value || !*env_value) return;
  char* end = nullptr;
  errno = 0;
  const double tol = std::strtod(env_value, &end);
  if (errno != 0 || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol))
    throw ConfigError(std::string("QOTTO_QUAD_TOL: expected a positive number, got '") +
                      env_value + "'");
  s.integrator.quad.abs_tol = tol;
  s.integrator.quad.rel_tol = tol;
}

CommandResult cmd_trajectory(const OttoScenario& s, const TrajectoryRequest& req) {
  return guarded([&] {
    const bool hot = req.bath == BathSelector::hot;
    const double omega = hot ? s.omega_h : s.omega_c;
    const BathSpec& bath = hot ? s.hot : s.cold;
    IntegratorConfig cfg = s.integrator;
    if (req.t_max) cfg.t_max = *req.t_max;
    cfg.validate(omega);

    auto ev = make_evolver(thermal_state(omega, bath.temperature), bath, omega, cfg);
    Trajectory traj;
    CommandResult res;
    if (req.until_crossing) {
      traj.omega = omega;
      traj.reference_temperature = bath.temperature;
      try {
        find_crossing_time(*ev, *req.until_crossing, s.crossing, &traj, cfg.sample_every);
      } catch (const NoCrossing& e) {
        res.exit_code = kExitInfeasible;
        res.message = e.what();
      }
    } else {
      traj = record_trajectory(*ev, bath.temperature, cfg.sample_every);
    }
    CsvOptions opts;
    opts.reference_columns = req.reference_columns;
    opts.x_hot_eq = s.omega_h / s.hot.temperature;
    opts.x_cold_eq = s.omega_c / s.cold.temperature;
    std::ostringstream os;
    write_trajectory_csv(os, traj, opts);
    res.output = os.str();
    if (res.message.empty()) res.message = advisory_message(s);
    return res;
  });
}

CommandResult cmd_cycle(const OttoScenario& s) {
  return guarded([&] {
    CommandResult res;
    CycleReport r;
    try {
      r = run_otto_cycle(s);
      if (!r.engine_condition_met) {
        res.exit_code = kExitInfeasible;
        res.message = r.diagnostic;
      }
    } catch (const Error& e) {
      if (exit_code_for(e) != kExitInfeasible) throw;
      r = no_crossing_report(s, e.what());
      res.exit_code = kExitInfeasible;
      res.message = e.what();
    }
    std::optional<CarnotReport> carnot;
    if (s.feasible()) carnot = carnot_cycle(s);
    Json j = to_json(r, carnot);
    j["weak_coupling_advisory"] = weak_coupling_advisory(s);
    j["scenario"] = scenario_to_json(s);
    res.output = dump(j);
    if (res.message.empty()) res.message = advisory_message(s);
    return res;
  });
}

CommandResult cmd_carnot(const OttoScenario& s) {
  return guarded([&] {
    if (!s.feasible())
      return CommandResult{kExitInfeasible, {}, "engine condition omega_h/T_h >= omega_c/T_c fails"};
    Json j = to_json(carnot_cycle(s));
    j["scenario"] = scenario_to_json(s);
    return CommandResult{kExitOk, dump(j), {}};
  });
}

CommandResult cmd_two_step(const OttoScenario& s) {
  return guarded([&] {
    const TwoLevelState start = thermal_state(s.omega_h, s.hot.temperature);
    const TwoLevelState target{
        s.omega_h, excited_probability(s.omega_c / s.cold.temperature), {}};
    Json j = to_json(two_step_protocol(start, target, s.hot.temperature));
    j["scenario"] = scenario_to_json(s);
    return CommandResult{kExitOk, dump(j), {}};
  });
}

// ---------------------------------------------------------------------------

std::string SweepAxis::label() const {
  std::string out;
  for (const auto& p : paths) out += (out.empty() ? "" : "+") + p;
  return out;
}

std::size_t SweepSpec::size() const {
  std::size_t n = axes.empty() ? 0 : 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

SweepSpec parse_sweep(const Json& base, std::string_view axes_text) {
  SweepSpec spec;
  spec.base = base;
  const Json doc = parse_document(axes_text);
  for (const auto& [k, v] : doc.items())
    if (k != "axis" && k != "max_points") throw ConfigError(k + ": unknown key in axes file");
  if (doc.contains("max_points")) {
    if (!doc["max_points"].is_number_integer() || doc["max_points"].get<long long>() < 1)
      throw ConfigError("max_points: expected a positive integer");
    spec.max_points = doc["max_points"].get<std::size_t>();
  }
  if (!doc.contains("axis") || !doc["axis"].is_array() || doc["axis"].empty())
    throw ConfigError("axis: at least one [[axis]] entry is required");
  for (std::size_t i = 0; i < doc["axis"].size(); ++i) {
    const Json& a = doc["axis"][i];
    const std::string where = "axis[" + std::to_string(i) + "]";
    if (!a.is_object()) throw ConfigError(where + ": expected a table");
    for (const auto& [k, v] : a.items())
      if (k != "path" && k != "values") throw ConfigError(where + "." + k + ": unknown key");
    SweepAxis axis;
    if (!a.contains("path")) throw ConfigError(where + ".path: required key missing");
    if (a["path"].is_string()) {
      axis.paths.push_back(a["path"].get<std::string>());
    } else if (a["path"].is_array() && !a["path"].empty()) {
      for (const auto& p : a["path"]) {
        if (!p.is_string()) throw ConfigError(where + ".path: entries must be strings");
        axis.paths.push_back(p.get<std::string>());
      }
    } else {
      throw ConfigError(where + ".path: expected a string or a list of strings");
    }
    if (!a.contains("values") || !a["values"].is_array() || a["values"].empty())
      throw ConfigError(where + ".values: expected a non-empty list");
    for (const auto& v : a["values"]) {
      if (!v.is_primitive() || v.is_null())
        throw ConfigError(where + ".values: entries must be scalars");
      axis.values.push_back(v);
    }
    spec.axes.push_back(std::move(axis));
  }
  if (spec.size() > spec.max_points) {
    std::ostringstream os;
    os << "sweep grid has " << spec.size() << " points, more than the maximum " << spec.max_points;
    throw ConfigError(os.str());
  }
  // Fail early on a base document that does not parse.
  scenario_from_json(base);
  return spec;
}

SweepResult run_sweep(const SweepSpec& spec, int jobs, const char* quad_tol_env) {
  if (spec.axes.empty()) throw ConfigError("sweep needs at least one axis");
  const std::size_t n = spec.size();
  SweepResult out;
  out.points.resize(n);

  auto evaluate = [&](std::size_t idx) {
    SweepPoint& pt = out.points[idx];
    Json doc = spec.base;
    std::string name = "point-";
    char num[16];
    std::snprintf(num, sizeof num, "%04zu", idx);
    name += num;
    std::size_t rem = idx;
    std::vector<std::size_t> digits(spec.axes.size());
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      digits[a] = rem % spec.axes[a].values.size();
      rem /= spec.axes[a].values.size();
    }
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const Json& v = spec.axes[a].values[digits[a]];
      pt.coordinates.push_back(v);
      name += "__" + spec.axes[a].label() + "=" + value_text(v);
    }
    pt.file_name = sanitize(name) + ".json";
    pt.summary = Json::object();
    try {
      for (std::size_t a = 0; a < spec.axes.size(); ++a)
        for (const auto& p : spec.axes[a].paths) set_path(doc, p, pt.coordinates[a]);
      OttoScenario s = scenario_from_json(doc);
      apply_quad_tol_override(s, quad_tol_env);
      pt.result = cmd_cycle(s);
      pt.summary["feasible"] = s.feasible();
    } catch (const std::exception& e) {
      pt.result = CommandResult{exit_code_for(e), {}, e.what()};
    }
    if (!pt.result.output.empty()) {
      const Json rep = Json::parse(pt.result.output);
      for (const char* k : {"tau1", "tau2", "w", "eta", "w_tilde"}) pt.summary[k] = rep[k];
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs < 1 ? 1 : jobs, n));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) evaluate(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "point";
  for (const auto& a : spec.axes) csv << ',' << csv_field(a.label());
  csv << ",tau1,tau2,w,eta,w_tilde,feasible,exit_code,file,error\n";
  for (std::size_t i = 0; i < n; ++i) {
    const SweepPoint& pt = out.points[i];
    csv << i;
    for (const auto& c : pt.coordinates) csv << ',' << csv_field(c);
    for (const char* k : {"tau1", "tau2", "w", "eta", "w_tilde", "feasible"})
      csv << ',' << csv_field(pt.summary.contains(k) ? pt.summary[k] : Json(nullptr));
    csv << ',' << pt.result.exit_code << ',' << (pt.result.output.empty() ? "" : pt.file_name)
        << ',' << (pt.result.output.empty() ? csv_field(pt.result.message) : "") << '\n';
    if (pt.result.output.empty()) out.exit_code = std::max(out.exit_code, pt.result.exit_code);
  }
  out.index_csv = csv.str();
  return out;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    f << text;
  };
  for (const auto& pt : result.points)
    if (!pt.result.output.empty()) write(dir / pt.file_name, pt.result.output);
  write(dir / "index.csv", result.index_csv);
}

}  // namespace qotto
