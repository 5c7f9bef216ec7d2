#pragma once

// Four-stroke Otto cycle on a two-level working medium, its entropy
// bookkeeping, and the Carnot cycle it reduces to once the preparation cost
// of the non-equilibrium contact states is charged as work.

#include <optional>
#include <string>

#include "qotto/bath.hpp"
#include "qotto/dynamics.hpp"
#include "qotto/thermo.hpp"

namespace qotto {

enum class CrossingSelection { first_crossing };

struct CrossingConfig {
  double scan_dt = 0.01;
  double bisect_tol = 1e-12;
  CrossingSelection selection = CrossingSelection::first_crossing;

  void validate() const;
};

struct CrossingResult {
  double time = 0.0;
  TwoLevelState state;
  double residual = 0.0;  // x_ratio(state) - target
  double slope = 0.0;     // dx/dt across the final bracket
};

// Earliest t > 0 at which x_ratio of the evolving state equals target_x.
// Pre-scans at crossing.scan_dt on the evolver's dense output, then bisects
// the first sign change down to bisect_tol and finishes with one secant step.
// If `record` is given, integrator samples up to the crossing (every
// sample_every steps) and the crossing state itself are appended to it.
//
// Throws NoCrossing when target_x equals the starting ratio or no sign change
// occurs before the horizon, and UndefinedTemperature on population inversion.
CrossingResult find_crossing_time(ContactEvolver& evolver, double target_x,
                                  const CrossingConfig& crossing, Trajectory* record = nullptr,
                                  int sample_every = 1);

struct OttoScenario {
  double omega_h = 5.2;
  double omega_c = 2.5;
  BathSpec hot;
  BathSpec cold;
  IntegratorConfig integrator;
  CrossingConfig crossing;

  // omega_h/T_h >= omega_c/T_c
  bool feasible() const;
  void validate() const;

  // Fills integrator and crossing defaults: dt = 2 pi/(80 omega_h), t_max
  // the longer of the two contacts' 100/a_inf, scan_dt = dt.
  static OttoScenario with_defaults(double omega_h, double omega_c, const BathSpec& hot,
                                    const BathSpec& cold);

  IntegratorConfig contact_config() const { return integrator; }
};

struct CycleReport {
  bool engine_condition_met = false;
  bool crossings_found = false;
  bool degenerate = false;  // omega_h/T_h == omega_c/T_c: zero-length strokes

  std::optional<double> tau1;
  std::optional<double> tau2;

  double q_h = 0.0;
  double q_c = 0.0;
  double w1 = 0.0;  // hot -> cold adiabat
  double w2 = 0.0;  // cold -> hot adiabat
  double w = 0.0;
  double eta = 0.0;

  double cost_h = 0.0;  // T_h S(rho_c^eq || rho_h^eq)
  double cost_c = 0.0;  // T_c S(rho_h^eq || rho_c^eq)
  double q_h_tilde = 0.0;
  double q_c_tilde = 0.0;
  double w_tilde = 0.0;
  double eta_tilde = 0.0;

  double delta_s_v = 0.0;
  double delta_s_tot_hot = 0.0;
  double delta_s_tot_hot_tilde = 0.0;

  // Effective temperatures at the ends of the contacts (primes) and after
  // the following adiabats (double primes).
  std::optional<double> t_h_prime;
  std::optional<double> t_c_prime;
  std::optional<double> t_h_double_prime;
  std::optional<double> t_c_double_prime;
  std::optional<double> eta_from_temperatures;

  double crossing_residual_hot = 0.0;
  double crossing_residual_cold = 0.0;
  bool stage3_start_snapped = false;

  TwoLevelState end_hot;   // state when the hot contact ends
  TwoLevelState end_cold;  // state when the cold contact ends

  std::string diagnostic;
};

// Stage 1 from thermal(omega_h, T_h) under the hot bath until
// x = omega_c/T_c; stage 2 instantaneous omega_h -> omega_c; stage 3 from
// thermal(omega_c, T_c) under the cold bath until x = omega_h/T_h; stage 4
// back to omega_h. Infeasible scenarios return a closed-form diagnostic
// report with engine_condition_met = false instead of throwing.
CycleReport run_otto_cycle(const OttoScenario& s);

// Report for a feasible scenario whose crossings were not found: costs are
// filled in, crossing-dependent values are NaN.
CycleReport no_crossing_report(const OttoScenario& s, const std::string& why);

struct EntropyDecomposition {
  double t_delta_d = 0.0;    // T [D(final) - D(initial)], D relative to thermal(omega, T)
  double t_delta_s_v = 0.0;  // T [S_v(final) - S_v(initial)]
};

EntropyDecomposition entropy_decomposition(const TwoLevelState& initial,
                                           const TwoLevelState& final_state, double bath_T);

struct TwoStepReport {
  double omega_intermediate = 0.0;
  double delta_F = 0.0;
  double isothermal_heat = 0.0;
  double isothermal_work = 0.0;
  double adiabatic_work = 0.0;
  double total_work = 0.0;
};

// Isothermal omega -> omega_in at temperature T, then an adiabat back to
// omega, taking thermal(omega, T) to the target populations.
TwoStepReport two_step_protocol(const TwoLevelState& start, const TwoLevelState& target,
                                double temperature);

struct CarnotReport {
  double q_h_c = 0.0;
  double q_c_c = 0.0;
  double w_c = 0.0;
  double eta_c = 0.0;
  double omega_h_prime = 0.0;
  double omega_c_prime = 0.0;
  double k_h = 0.0;  // ln[(1 - P_h^eq)/P_h^eq]
  double k_c = 0.0;  // ln[(1 - P_c^eq)/P_c^eq]
  double q_h_c_log_odds = 0.0;  // q_h_c via the spacing/probability form
  double q_c_c_log_odds = 0.0;
};

CarnotReport carnot_cycle(const OttoScenario& s);

// max_t T * S(rho(t) || rho_eq) over the samples of an equilibrium-start
// trajectory.
double nm_lower_bound(const Trajectory& traj, double bath_T);

struct FixedCycleReport {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double p_end_hot = 0.0;
  double p_end_cold = 0.0;
  double q_h = 0.0;
  double q_c = 0.0;
  double w = 0.0;
};

// Periodic steady state of a cycle with prescribed contact durations. Each
// contact acts affinely on <sigma_z>, so the limit cycle is found exactly
// from two probe evolutions per contact.
FixedCycleReport run_fixed_duration_cycle(const OttoScenario& s, double tau1, double tau2);

}  // namespace qotto
