#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "qotto/commands.hpp"
#include "qotto/error.hpp"

namespace {

constexpr const char* kVersion = "qotto 0.1.0";

int emit(const qotto::CommandResult& r, const std::string& out) {
  if (!r.message.empty()) std::cerr << r.message << "\n";
  if (!r.output.empty()) {
    if (out.empty() || out == "-") {
      std::cout << r.output;
    } else {
      std::ofstream f(out, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write '" << out << "'\n";
        return qotto::kExitConfig;
      }
      f << r.output;
    }
  }
  return r.exit_code;
}

qotto::OttoScenario load(const std::string& path) {
  qotto::OttoScenario s = qotto::load_scenario(path);
  qotto::apply_quad_tol_override(s, std::getenv("QOTTO_QUAD_TOL"));
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qotto::ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level quantum Otto engine with non-Markovian bath contacts"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, out, bath = "hot", axes;
  double t_max = 0.0, until = 0.0;
  bool reference_columns = false;
  int jobs = 1;

  auto* traj = app.add_subcommand("trajectory", "x_ratio(t) and entropies for one bath contact (CSV)");
  traj->add_option("--config", config, "scenario file (TOML or JSON)")->required();
  traj->add_option("--bath", bath, "hot or cold")->check(CLI::IsMember({"hot", "cold"}));
  auto* t_max_opt = traj->add_option("--t-max", t_max, "integration horizon");
  auto* until_opt = traj->add_option("--until-crossing", until, "stop where x_ratio reaches X");
  traj->add_flag("--reference-columns", reference_columns, "append omega_h/T_h and omega_c/T_c");
  traj->add_option("--out", out, "output file, stdout if omitted");

  auto* cycle = app.add_subcommand("cycle", "run the Otto cycle and its corrected ledger (JSON)");
  cycle->add_option("--config", config)->required();
  cycle->add_option("--out", out);

  auto* carnot = app.add_subcommand("carnot", "reference Carnot cycle (JSON)");
  carnot->add_option("--config", config)->required();
  carnot->add_option("--out", out);

  auto* two = app.add_subcommand("two-step", "isothermal + adiabatic preparation of the hot-contact state (JSON)");
  two->add_option("--config", config)->required();
  two->add_option("--out", out);

  auto* sweep = app.add_subcommand("sweep", "cycle reports over a parameter grid");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--axes", axes, "TOML file with [[axis]] path/values tables")->required();
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 1024));
  sweep->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : qotto::kExitConfig;
  }

  try {
    if (*traj) {
      qotto::TrajectoryRequest req;
      req.bath = bath == "hot" ? qotto::BathSelector::hot : qotto::BathSelector::cold;
      if (*t_max_opt) req.t_max = t_max;
      if (*until_opt) req.until_crossing = until;
      req.reference_columns = reference_columns;
      return emit(qotto::cmd_trajectory(load(config), req), out);
    }
    if (*cycle) return emit(qotto::cmd_cycle(load(config)), out);
    if (*carnot) return emit(qotto::cmd_carnot(load(config)), out);
    if (*two) return emit(qotto::cmd_two_step(load(config)), out);
    if (*sweep) {
      const auto spec = qotto::parse_sweep(qotto::parse_document(read_file(config)), read_file(axes));
      const auto result = qotto::run_sweep(spec, jobs, std::getenv("QOTTO_QUAD_TOL"));
      qotto::write_sweep(result, out);
      for (const auto& pt : result.points)
        if (pt.result.output.empty())
          std::cerr << pt.file_name << ": " << pt.result.message << "\n";
      return result.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return qotto::exit_code_for(e);
  }
  return qotto::kExitConfig;
}
