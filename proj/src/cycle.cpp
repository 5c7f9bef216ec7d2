#include "qotto/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qotto/error.hpp"

namespace qotto {

namespace {

// Cross-check tolerance between the bookkeeping ledger and the
// closed-form probability expressions.
constexpr double kCrossCheckTol = 1e-9;

double energy(double omega, double p) { return omega * (p - 0.5); }

double binary_entropy(double p) {
  return von_neumann_entropy(TwoLevelState{1.0, p, {}});
}

double kl(double p, double q) {
  return relative_entropy(TwoLevelState{1.0, p, {}}, TwoLevelState{1.0, q, {}});
}

// x of a state that must carry a temperature.
double crossing_coordinate(const TwoLevelState& s, double t) {
  if (s.p_excited > 0.5) {
    std::ostringstream os;
    os << "population inversion at t = " << t << " (p_excited = " << s.p_excited << ")";
    throw UndefinedTemperature(os.str());
  }
  return x_ratio(TwoLevelState{s.omega, s.p_excited, {}});
}

// Ledger over the four corners A (cycle start), B (hot contact end),
// C (cold contact start), D (cold contact end).
void fill_ledger(CycleReport& r, const OttoScenario& s, double p_a, double p_b, double p_c,
                 double p_d) {
  const double wh = s.omega_h;
  const double wc = s.omega_c;
  const double th = s.hot.temperature;
  const double tc = s.cold.temperature;

  r.q_h = energy(wh, p_b) - energy(wh, p_a);
  r.q_c = energy(wc, p_d) - energy(wc, p_c);
  r.w1 = energy(wh, p_b) - energy(wc, p_b);
  r.w2 = energy(wc, p_d) - energy(wh, p_d);
  r.w = r.w1 + r.w2;
  r.eta = r.q_h != 0.0 ? r.w / r.q_h : 1.0 - wc / wh;

  const double p_h_eq = excited_probability(wh / th);
  const double p_c_eq = excited_probability(wc / tc);
  r.cost_h = th * kl(p_c_eq, p_h_eq);
  r.cost_c = tc * kl(p_h_eq, p_c_eq);
  r.q_h_tilde = r.q_h - r.cost_h;
  r.q_c_tilde = r.q_c - r.cost_c;
  r.w_tilde = r.q_h_tilde + r.q_c_tilde;
  r.eta_tilde = r.q_h_tilde != 0.0 ? r.w_tilde / r.q_h_tilde : 1.0 - tc / th;

  r.delta_s_v = binary_entropy(p_b) - binary_entropy(p_d);
  const double ds_hot = binary_entropy(p_b) - binary_entropy(p_a);
  r.delta_s_tot_hot = -r.q_h / th + ds_hot;
  r.delta_s_tot_hot_tilde = -r.q_h_tilde / th + ds_hot;

  r.end_hot = TwoLevelState{wh, p_b, {}};
  r.end_cold = TwoLevelState{wc, p_d, {}};

  if (p_b > 0.0 && p_b < 0.5 && p_d > 0.0 && p_d < 0.5) {
    const double x_b = x_ratio(r.end_hot);
    const double x_d = x_ratio(r.end_cold);
    r.t_h_prime = wh / x_b;
    r.t_c_prime = wc / x_d;
    r.t_h_double_prime = wc / x_b;
    r.t_c_double_prime = wh / x_d;
    r.eta_from_temperatures = 1.0 - std::sqrt(tc * *r.t_c_prime / (th * *r.t_h_prime));
  }
}

// W = (omega_h - omega_c) [P(omega_h/T_h') - P(omega_c/T_c')].
void cross_check_work(const CycleReport& r, const OttoScenario& s) {
  if (!r.t_h_prime || !r.t_c_prime) return;
  const double canonical = (s.omega_h - s.omega_c) *
                           (excited_probability(s.omega_h / *r.t_h_prime) -
                            excited_probability(s.omega_c / *r.t_c_prime));
  if (std::abs(canonical - r.w) > kCrossCheckTol) {
    std::ostringstream os;
    os << "work ledger " << r.w << " disagrees with the canonical form " << canonical;
    throw NumericalFailure(os.str(), std::abs(canonical - r.w));
  }
}

}  // namespace

void CrossingConfig::validate() const {
  std::ostringstream os;
  if (!(scan_dt > 0.0) || !std::isfinite(scan_dt))
    os << "scan_dt must be positive, got " << scan_dt;
  else if (!(bisect_tol > 0.0))
    os << "bisect_tol must be positive, got " << bisect_tol;
  else if (!(bisect_tol < scan_dt))
    os << "bisect_tol (" << bisect_tol << ") must be smaller than scan_dt (" << scan_dt << ")";
  else
    return;
  throw InvalidParameter(os.str());
}

CrossingResult find_crossing_time(ContactEvolver& evolver, double target_x,
                                  const CrossingConfig& crossing, Trajectory* record,
                                  int sample_every) {
  crossing.validate();
  if (sample_every < 1) throw InvalidParameter("sample_every must be >= 1");
  const double t_start = evolver.time();
  const double x0 = crossing_coordinate(evolver.state(), t_start);
  if (std::abs(x0 - target_x) <= 1e-14 * std::max(1.0, std::abs(target_x))) {
    std::ostringstream os;
    os << "target x = " << target_x << " equals the starting value; no strict crossing";
    throw NoCrossing(os.str());
  }
  const bool above = x0 > target_x;
  auto f = [&](double t) {
    const double x = crossing_coordinate(evolver.state_at(t), t);
    return above ? x - target_x : target_x - x;
  };

  evolver.retain_steps(static_cast<std::size_t>(std::ceil(crossing.scan_dt / evolver.dt())) + 2);
  if (record) record->push_back(t_start, evolver.state());
  std::size_t steps = 0;
  auto step_once = [&] {
    if (!evolver.advance()) return false;
    ++steps;
    if (record && steps % static_cast<std::size_t>(sample_every) == 0)
      record->push_back(evolver.time(), evolver.state());
    return true;
  };

  double lo = t_start;
  double f_lo = f(lo);
  for (std::size_t k = 1;; ++k) {
    double hi = t_start + static_cast<double>(k) * crossing.scan_dt;
    const bool last = hi >= evolver.horizon();
    if (last) hi = evolver.horizon();
    while (evolver.time() < hi - 1e-12 * evolver.dt())
      if (!step_once()) break;
    hi = std::min(hi, evolver.time());
    const double f_hi = f(hi);

    if (f_hi <= 0.0) {
      double a = lo, fa = f_lo, b = hi, fb = f_hi;
      for (int it = 0; it < 200 && b - a > crossing.bisect_tol && fb != 0.0; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = f(mid);
        if (fm > 0.0) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
          fb = fm;
        }
      }
      double t_star = b;
      if (fb != 0.0 && fa != fb) t_star = std::clamp(a - fa * (b - a) / (fb - fa), a, b);
      CrossingResult out;
      out.time = t_star;
      out.state = evolver.state_at(t_star);
      out.residual = crossing_coordinate(out.state, t_star) - target_x;
      out.slope = b > a ? (above ? -1.0 : 1.0) * (fb - fa) / (b - a) : 0.0;
      if (record) {
        while (!record->times.empty() && record->times.back() >= t_star) {
          record->times.pop_back();
          record->sigma_z.pop_back();
          record->coherence.pop_back();
          record->x_ratio.pop_back();
          record->rel_entropy_to_eq.pop_back();
          record->s_von_neumann.pop_back();
        }
        record->push_back(t_star, out.state);
      }
      return out;
    }
    if (last || evolver.finished()) break;
    lo = hi;
    f_lo = f_hi;
  }
  std::ostringstream os;
  os << "x never reaches " << target_x << " before t = " << evolver.horizon()
     << " (starting from " << x0 << ")";
  throw NoCrossing(os.str());
}

// ---------------------------------------------------------------------------

bool OttoScenario::feasible() const {
  return omega_h / hot.temperature >= omega_c / cold.temperature;
}

void OttoScenario::validate() const {
  std::ostringstream os;
  if (!(omega_c > 0.0) || !(omega_h > 0.0) || !std::isfinite(omega_h))
    os << "level spacings must be positive (omega_h = " << omega_h << ", omega_c = " << omega_c
       << ")";
  else if (!(omega_c < omega_h))
    os << "omega_c (" << omega_c << ") must be smaller than omega_h (" << omega_h << ")";
  if (!os.str().empty()) throw InvalidParameter(os.str());
  hot.validate();
  cold.validate();
  if (cold.temperature > hot.temperature) {
    os << "cold bath temperature (" << cold.temperature << ") exceeds hot bath temperature ("
       << hot.temperature << ")";
    throw InvalidParameter(os.str());
  }
  integrator.validate(omega_h);
  crossing.validate();
}

OttoScenario OttoScenario::with_defaults(double omega_h, double omega_c, const BathSpec& hot,
                                         const BathSpec& cold) {
  OttoScenario s;
  s.omega_h = omega_h;
  s.omega_c = omega_c;
  s.hot = hot;
  s.cold = cold;
  const auto ih = IntegratorConfig::defaults(omega_h, hot);
  const auto ic = IntegratorConfig::defaults(omega_c, cold);
  s.integrator = ih;
  s.integrator.t_max = std::max(ih.t_max, ic.t_max);
  s.crossing.scan_dt = s.integrator.dt;
  return s;
}

CycleReport run_otto_cycle(const OttoScenario& s) {
  s.validate();
  const double x_h = s.omega_h / s.hot.temperature;
  const double x_c = s.omega_c / s.cold.temperature;
  const double p_h_eq = excited_probability(x_h);
  const double p_c_eq = excited_probability(x_c);

  CycleReport r;
  if (!s.feasible()) {
    fill_ledger(r, s, p_h_eq, p_c_eq, p_c_eq, p_h_eq);
    std::ostringstream os;
    os << "engine condition violated: omega_h/T_h = " << x_h << " < omega_c/T_c = " << x_c
       << "; corners evaluated in closed form, W = " << r.w;
    r.diagnostic = os.str();
    return r;
  }

  if (std::abs(x_h - x_c) <= 1e-14 * std::max(1.0, x_h)) {
    r.degenerate = true;
    r.engine_condition_met = true;
    r.crossings_found = true;
    r.tau1 = 0.0;
    r.tau2 = 0.0;
    fill_ledger(r, s, p_h_eq, p_h_eq, p_c_eq, p_c_eq);
    r.diagnostic = "omega_h/T_h equals omega_c/T_c: zero-length contacts, W = 0";
    return r;
  }

  const IntegratorConfig cfg = s.contact_config();

  auto hot_ev = make_evolver(thermal_state(s.omega_h, s.hot.temperature), s.hot, s.omega_h, cfg);
  const CrossingResult first = find_crossing_time(*hot_ev, x_c, s.crossing);
  r.tau1 = first.time;
  r.crossing_residual_hot = first.residual;

  // Stage 2 keeps populations; the cold contact then starts from thermal
  // equilibrium when the crossing is resolved to the bisection tolerance.
  TwoLevelState stage3{s.omega_c, first.state.p_excited, {}};
  if (std::abs(first.residual) <= 10.0 * s.crossing.bisect_tol * std::abs(first.slope)) {
    stage3 = thermal_state(s.omega_c, s.cold.temperature);
    r.stage3_start_snapped = true;
  }

  auto cold_ev = make_evolver(stage3, s.cold, s.omega_c, cfg);
  const CrossingResult second = find_crossing_time(*cold_ev, x_h, s.crossing);
  r.tau2 = second.time;
  r.crossing_residual_cold = second.residual;

  r.crossings_found = true;
  fill_ledger(r, s, p_h_eq, first.state.p_excited, stage3.p_excited, second.state.p_excited);
  r.engine_condition_met = true;
  cross_check_work(r, s);
  return r;
}

CycleReport no_crossing_report(const OttoScenario& s, const std::string& why) {
  CycleReport r;
  fill_ledger(r, s, 0.5, 0.5, 0.5, 0.5);
  const double cost_h = r.cost_h;
  const double cost_c = r.cost_c;
  r = CycleReport{};
  const double nan = std::nan("");
  r.q_h = r.q_c = r.w1 = r.w2 = r.w = r.eta = nan;
  r.q_h_tilde = r.q_c_tilde = r.w_tilde = r.eta_tilde = nan;
  r.delta_s_v = r.delta_s_tot_hot = r.delta_s_tot_hot_tilde = nan;
  r.crossing_residual_hot = r.crossing_residual_cold = nan;
  r.cost_h = cost_h;
  r.cost_c = cost_c;
  // corrected work is (T_h - T_c) dS_v whatever the contact end states are
  if (s.hot.temperature == s.cold.temperature) r.w_tilde = 0.0;
  r.diagnostic = why;
  return r;
}

EntropyDecomposition entropy_decomposition(const TwoLevelState& initial,
                                           const TwoLevelState& final_state, double bath_T) {
  if (!initial.diagonal() || !final_state.diagonal())
    throw InvalidParameter("entropy_decomposition: states must be diagonal");
  if (std::abs(initial.omega - final_state.omega) > 1e-12 * initial.omega)
    throw InvalidParameter("entropy_decomposition: states have different level spacings");
  if (!(bath_T > 0.0)) throw InvalidParameter("entropy_decomposition: bath_T must be positive");
  const TwoLevelState eq = thermal_state(initial.omega, bath_T);
  EntropyDecomposition out;
  out.t_delta_d = bath_T * (relative_entropy(final_state, eq) - relative_entropy(initial, eq));
  out.t_delta_s_v = bath_T * (von_neumann_entropy(final_state) - von_neumann_entropy(initial));
  return out;
}

TwoStepReport two_step_protocol(const TwoLevelState& start, const TwoLevelState& target,
                                double temperature) {
  if (!(temperature > 0.0)) throw InvalidParameter("two_step_protocol: T must be positive");
  if (!start.diagonal() || !target.diagonal())
    throw InvalidParameter("two_step_protocol: states must be diagonal");
  if (std::abs(start.omega - target.omega) > 1e-12 * start.omega)
    throw InvalidParameter("two_step_protocol: start and target have different level spacings");
  const double omega = start.omega;
  const double x_start = x_ratio(start);
  if (std::abs(x_start - omega / temperature) > 1e-9 * std::max(1.0, x_start))
    throw InvalidParameter("two_step_protocol: start is not thermal at the given temperature");
  if (!(target.p_excited > 0.0 && target.p_excited < 0.5)) {
    std::ostringstream os;
    os << "two_step_protocol: target p_excited = " << target.p_excited
       << " is not a thermal state with positive spacing";
    throw InvalidParameter(os.str());
  }

  TwoStepReport out;
  out.omega_intermediate = temperature * x_ratio(target);
  if (target.p_excited == start.p_excited) {
    out.omega_intermediate = omega;
    return out;
  }
  out.delta_F = temperature * (log_partition(omega, temperature) -
                               log_partition(out.omega_intermediate, temperature));
  out.isothermal_heat =
      temperature * (binary_entropy(target.p_excited) - binary_entropy(start.p_excited));
  out.isothermal_work = out.delta_F;
  out.adiabatic_work =
      energy(omega, target.p_excited) - energy(out.omega_intermediate, target.p_excited);
  out.total_work = out.isothermal_work + out.adiabatic_work;
  return out;
}

CarnotReport carnot_cycle(const OttoScenario& s) {
  s.validate();
  if (!s.feasible()) throw InvalidParameter("carnot_cycle: scenario is infeasible");
  const double th = s.hot.temperature;
  const double tc = s.cold.temperature;
  const double p_h = excited_probability(s.omega_h / th);
  const double p_c = excited_probability(s.omega_c / tc);

  CarnotReport c;
  c.omega_h_prime = s.omega_c * th / tc;
  c.omega_c_prime = s.omega_h * tc / th;
  c.k_h = x_ratio(TwoLevelState{s.omega_h, p_h, {}});
  c.k_c = x_ratio(TwoLevelState{s.omega_c, p_c, {}});

  const double ds = binary_entropy(p_c) - binary_entropy(p_h);
  c.q_h_c = th * ds;
  c.q_c_c = -tc * ds;
  c.w_c = c.q_h_c + c.q_c_c;
  c.eta_c = 1.0 - tc / th;

  // S_v(P) = P k - ln(1 - P) with k the log-odds.
  const double bracket = p_c * c.k_c - p_h * c.k_h + std::log1p(-p_h) - std::log1p(-p_c);
  c.q_h_c_log_odds = s.omega_h / c.k_h * bracket;
  c.q_c_c_log_odds = -s.omega_c / c.k_c * bracket;
  const double mismatch =
      std::max(std::abs(c.q_h_c_log_odds - c.q_h_c), std::abs(c.q_c_c_log_odds - c.q_c_c));
  if (mismatch > kCrossCheckTol) {
    std::ostringstream os;
    os << "Carnot heat from log-odds form disagrees with the entropy form by " << mismatch;
    throw NumericalFailure(os.str(), mismatch);
  }
  return c;
}

double nm_lower_bound(const Trajectory& traj, double bath_T) {
  if (!(bath_T > 0.0)) throw InvalidParameter("nm_lower_bound: bath_T must be positive");
  double best = 0.0;
  for (double d : traj.rel_entropy_to_eq) best = std::max(best, bath_T * d);
  return best;
}

FixedCycleReport run_fixed_duration_cycle(const OttoScenario& s, double tau1, double tau2) {
  s.validate();
  if (!(tau1 >= 0.0) || !(tau2 >= 0.0))
    throw InvalidParameter("run_fixed_duration_cycle: durations must be >= 0");

  // sigma_z at the end of a contact as m * sigma_z(start) + k.
  auto affine = [&](const BathSpec& bath, double omega, double tau) {
    if (tau == 0.0) return std::pair{1.0, 0.0};
    IntegratorConfig cfg = s.integrator;
    cfg.t_max = tau;
    auto end_sz = [&](double p) {
      auto ev = make_evolver(TwoLevelState{omega, p, {}}, bath, omega, cfg);
      while (ev->advance()) {
      }
      return sigma_z_expectation(ev->state_at(tau));
    };
    const double k = end_sz(0.5);
    const double m = k - end_sz(0.0);
    return std::pair{m, k};
  };
  const auto [m1, k1] = affine(s.hot, s.omega_h, tau1);
  const auto [m3, k3] = affine(s.cold, s.omega_c, tau2);
  const double denom = 1.0 - m1 * m3;
  if (!(std::abs(denom) > 1e-15))
    throw NumericalFailure("run_fixed_duration_cycle: contacts do not relax; no limit cycle");
  const double sz_b = (m1 * k3 + k1) / denom;
  const double sz_d = m3 * sz_b + k3;

  FixedCycleReport out;
  out.tau1 = tau1;
  out.tau2 = tau2;
  out.p_end_hot = 0.5 * (1.0 + sz_b);
  out.p_end_cold = 0.5 * (1.0 + sz_d);
  out.q_h = s.omega_h * (out.p_end_hot - out.p_end_cold);
  out.q_c = s.omega_c * (out.p_end_cold - out.p_end_hot);
  out.w = out.q_h + out.q_c;
  return out;
}

}  // namespace qotto
