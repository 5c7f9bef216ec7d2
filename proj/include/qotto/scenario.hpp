#pragma once

// Scenario files (TOML or JSON in), reports (JSON out), trajectory CSV.

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qotto/cycle.hpp"

namespace qotto {

using Json = nlohmann::ordered_json;

// Parses a scenario document. JSON is recognised by a leading '{', anything
// else is read as TOML. Unknown keys, missing required keys and invalid
// values raise ConfigError naming the key path.
OttoScenario parse_scenario(std::string_view text);
OttoScenario load_scenario(const std::string& path);

// Raw document tree, before validation and defaults.
Json parse_document(std::string_view text);

// Validates the tree and resolves defaults: lambda = 4 omega for each
// contact, integration and crossing settings as in OttoScenario::with_defaults.
OttoScenario scenario_from_json(const Json& doc);

// Fully resolved scenario in the input schema; parse_scenario(dump) gives
// back an equal scenario.
Json scenario_to_json(const OttoScenario& s);

bool operator==(const OttoScenario& a, const OttoScenario& b);

Json to_json(const CycleReport& r, const std::optional<CarnotReport>& carnot);
Json to_json(const CarnotReport& c);
Json to_json(const TwoStepReport& t);

// Serialises with fixed key order and shortest round-trip doubles.
std::string dump(const Json& j);

// Shortest round-trip text for v, with at least 12 significant digits when
// the value needs them; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

struct CsvOptions {
  bool reference_columns = false;
  double x_hot_eq = 0.0;
  double x_cold_eq = 0.0;
};

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& opts = {});

// Sets the value at a dotted path ("hot_bath.gamma") in a raw document.
void set_path(Json& doc, const std::string& path, const Json& value);

}  // namespace qotto
