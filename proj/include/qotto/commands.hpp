#pragma once

// The qotto subcommands as library calls. Each returns the document it
// would write plus an exit code: 0 ok, 2 configuration error, 3 physically
// infeasible (engine condition or crossing not met), 4 numerical failure.

#include <cstddef>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qotto/scenario.hpp"

namespace qotto {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInfeasible = 3, kExitNumerical = 4 };

int exit_code_for(const std::exception& e);

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;   // empty when nothing could be produced
  std::string message;  // for stderr
};

// Overrides both quadrature tolerances with the value of QOTTO_QUAD_TOL, if
// set. A malformed value is a configuration error.
void apply_quad_tol_override(OttoScenario& s, const char* env_value);

enum class BathSelector { hot, cold };

struct TrajectoryRequest {
  BathSelector bath = BathSelector::hot;
  std::optional<double> t_max;
  std::optional<double> until_crossing;
  bool reference_columns = false;
};

CommandResult cmd_trajectory(const OttoScenario& s, const TrajectoryRequest& req);
CommandResult cmd_cycle(const OttoScenario& s);
CommandResult cmd_carnot(const OttoScenario& s);
CommandResult cmd_two_step(const OttoScenario& s);

struct SweepAxis {
  std::vector<std::string> paths;  // set together to each value
  std::vector<Json> values;

  std::string label() const;
};

struct SweepSpec {
  Json base;  // raw scenario document
  std::vector<SweepAxis> axes;
  std::size_t max_points = 10000;

  std::size_t size() const;
};

// Axes file:
//   [[axis]]
//   path = "hot_bath.gamma"        # or a list of paths
//   values = [0.05, 0.1, 0.2]
SweepSpec parse_sweep(const Json& base, std::string_view axes_text);

struct SweepPoint {
  std::string file_name;
  std::vector<Json> coordinates;
  CommandResult result;
  Json summary;  // tau1, tau2, w, eta, w_tilde, feasible
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::string index_csv;
  int exit_code = kExitOk;
};

// Points are evaluated on `jobs` worker threads and stored by grid index,
// so the result does not depend on the number of workers.
SweepResult run_sweep(const SweepSpec& spec, int jobs, const char* quad_tol_env = nullptr);

void write_sweep(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace qotto
