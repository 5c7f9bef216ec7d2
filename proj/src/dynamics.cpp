#include "qotto/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qotto/error.hpp"

namespace qotto {

namespace {

constexpr double kPositivitySlack = 1e-9;

std::size_t step_count(double horizon, double dt) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
}

double safe_x_ratio(const TwoLevelState& s) {
  if (!s.diagonal()) return std::numeric_limits<double>::quiet_NaN();
  try {
    return x_ratio(s);
  } catch (const DivergentRatio&) {
    return s.p_excited < 0.5 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
  }
}

void check_positivity(double t, double sz, double omega) {
  if (std::abs(sz) > 1.0 + kPositivitySlack || !std::isfinite(sz)) {
    std::ostringstream os;
    os << "positivity breach: <sigma_z> = " << sz << " at t = " << t << " (omega_A = " << omega
       << ")";
    throw NumericalFailure(os.str());
  }
}

// Hermite cubic on [t0, t0 + h] from end values and slopes.
template <class V>
V hermite(double s, double h, const V& y0, const V& d0, const V& y1, const V& d1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

}  // namespace

IntegratorConfig IntegratorConfig::defaults(double omega_A, const BathSpec& bath) {
  IntegratorConfig cfg;
  cfg.dt = 2.0 * std::numbers::pi / (80.0 * omega_A);
  cfg.t_max = 100.0 / lindblad_rates(omega_A, bath).decay_a;
  return cfg;
}

void IntegratorConfig::validate(double omega_fastest) const {
  std::ostringstream os;
  if (!(dt > 0.0) || !std::isfinite(dt))
    os << "dt must be positive, got " << dt;
  else if (!(t_max >= dt))
    os << "t_max (" << t_max << ") must be >= dt (" << dt << ")";
  else if (dt > 2.0 * std::numbers::pi / (40.0 * omega_fastest) * (1.0 + 1e-12))
    os << "dt = " << dt << " does not resolve omega = " << omega_fastest
       << " (need dt <= 2 pi/(40 omega) = " << 2.0 * std::numbers::pi / (40.0 * omega_fastest)
       << ")";
  else if (sample_every < 1)
    os << "sample_every must be >= 1";
  else
    return;
  throw InvalidParameter(os.str());
}

TwoLevelState Trajectory::state(std::size_t i) const {
  return TwoLevelState{omega, 0.5 * (1.0 + sigma_z.at(i)), coherence.at(i)};
}

void Trajectory::push_back(double t, const TwoLevelState& s) {
  times.push_back(t);
  sigma_z.push_back(sigma_z_expectation(s));
  coherence.push_back(s.coherence);
  x_ratio.push_back(safe_x_ratio(s));
  rel_entropy_to_eq.push_back(relative_entropy(s, thermal_state(omega, reference_temperature)));
  s_von_neumann.push_back(von_neumann_entropy(s));
}

CoefficientFn tcl2_source(const BathSpec& bath, double omega_A, const QuadratureOptions& quad) {
  auto kernel = std::make_shared<Tcl2Kernel>(omega_A, bath, quad);
  return [kernel](double t) { return (*kernel)(t); };
}

CoefficientFn constant_source(double decay_a, double drift_b, double frequency_shift) {
  Tcl2Coefficients c;
  c.gamma1 = {0.25 * (decay_a + drift_b), frequency_shift};
  c.gamma2 = {0.25 * (decay_a - drift_b), 0.0};
  c.decay_a = decay_a;
  c.drift_b = drift_b;
  return [c](double) { return c; };
}

// ---------------------------------------------------------------------------

ContactEvolver::ContactEvolver(const TwoLevelState& initial, double dt, double horizon)
    : omega_(initial.omega), dt_(dt), horizon_(horizon), state_(initial) {
  if (!(dt > 0.0)) throw InvalidParameter("evolver: dt must be positive");
  if (!(horizon >= 0.0)) throw InvalidParameter("evolver: horizon must be >= 0");
  horizon_ = dt * static_cast<double>(step_count(horizon, dt));
}

bool ContactEvolver::advance() {
  if (finished()) return false;
  ++step_;
  state_ = step_to(step_);
  time_ = dt_ * static_cast<double>(step_);
  return true;
}

// ---------------------------------------------------------------------------

Tcl2Evolver::Tcl2Evolver(const TwoLevelState& initial, CoefficientFn coefficients, double dt,
                         double horizon)
    : ContactEvolver(initial, dt, horizon),
      coefficients_(std::move(coefficients)),
      current_coef_(coefficients_(0.0)),
      sz_(sigma_z_expectation(initial)),
      c_rot_(initial.coherence) {}

TwoLevelState Tcl2Evolver::make_state(double t, double sz, std::complex<double> c_rot) const {
  std::complex<double> c{};
  if (c_rot != std::complex<double>{}) c = c_rot * std::polar(1.0, -omega_ * t);
  return TwoLevelState{omega_, 0.5 * (1.0 + sz), c};
}

TwoLevelState Tcl2Evolver::step_to(std::size_t n) {
  const double t0 = dt_ * static_cast<double>(n - 1);
  const double t1 = dt_ * static_cast<double>(n);
  const double h = t1 - t0;
  const Tcl2Coefficients& c0 = current_coef_;
  const Tcl2Coefficients cm = coefficients_(t0 + 0.5 * h);
  const Tcl2Coefficients c1 = coefficients_(t1);

  auto f = [](const Tcl2Coefficients& c, double sz) { return -c.decay_a * sz - c.drift_b; };
  auto g = [](const Tcl2Coefficients& c, std::complex<double> x) {
    return -c.coherence_rate() * x;
  };

  const double k1 = f(c0, sz_);
  const double k2 = f(cm, sz_ + 0.5 * h * k1);
  const double k3 = f(cm, sz_ + 0.5 * h * k2);
  const double k4 = f(c1, sz_ + h * k3);
  const double sz1 = sz_ + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  std::complex<double> c_rot1 = c_rot_;
  if (c_rot_ != std::complex<double>{}) {
    const auto l1 = g(c0, c_rot_);
    const auto l2 = g(cm, c_rot_ + 0.5 * h * l1);
    const auto l3 = g(cm, c_rot_ + 0.5 * h * l2);
    const auto l4 = g(c1, c_rot_ + h * l3);
    c_rot1 = c_rot_ + h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
  }
  check_positivity(t1, sz1, omega_);

  history_.push_back(
      Step{t0, t1, sz_, sz1, k1, f(c1, sz1), c_rot_, c_rot1, g(c0, c_rot_), g(c1, c_rot1)});
  while (history_.size() > retain_) history_.pop_front();

  sz_ = sz1;
  c_rot_ = c_rot1;
  current_coef_ = c1;
  return make_state(t1, sz1, c_rot1);
}

double Tcl2Evolver::earliest_time() const {
  return history_.empty() ? time_ : history_.front().t0;
}

TwoLevelState Tcl2Evolver::state_at(double t) const {
  if (std::abs(t - time_) <= 1e-14 * std::max(1.0, time_)) return state_;
  for (const Step& st : history_) {
    if (t >= st.t0 && t <= st.t1) {
      const double h = st.t1 - st.t0;
      const double s = (t - st.t0) / h;
      const double sz = hermite(s, h, st.sz0, st.dsz0, st.sz1, st.dsz1);
      std::complex<double> c{};
      if (st.c0 != std::complex<double>{} || st.c1 != std::complex<double>{})
        c = hermite(s, h, st.c0, st.dc0, st.c1, st.dc1);
      return make_state(t, sz, c);
    }
  }
  std::ostringstream os;
  os << "state_at(" << t << ") outside retained window [" << earliest_time() << ", " << time_
     << "]";
  throw InvalidParameter(os.str());
}

// ---------------------------------------------------------------------------

MarkovianEvolver::MarkovianEvolver(const TwoLevelState& initial, const BathSpec& bath, double dt,
                                   double horizon)
    : ContactEvolver(initial, dt, horizon),
      initial_(initial),
      rates_(lindblad_rates(initial.omega, bath)),
      sz_eq_(-rates_.drift_b / rates_.decay_a) {}

TwoLevelState MarkovianEvolver::state_at(double t) const {
  const double sz0 = sigma_z_expectation(initial_);
  const double sz = sz_eq_ + (sz0 - sz_eq_) * std::exp(-rates_.decay_a * t);
  std::complex<double> c{};
  if (!initial_.diagonal())
    c = initial_.coherence *
        std::exp(std::complex<double>{-0.5 * rates_.decay_a, -omega_} * t);
  return TwoLevelState{omega_, 0.5 * (1.0 + sz), c};
}

TwoLevelState MarkovianEvolver::step_to(std::size_t n) {
  return state_at(dt_ * static_cast<double>(n));
}

// ---------------------------------------------------------------------------

std::unique_ptr<ContactEvolver> make_evolver(const TwoLevelState& initial, const BathSpec& bath,
                                             double omega_A, const IntegratorConfig& cfg) {
  bath.validate();
  if (std::abs(initial.omega - omega_A) > 1e-12 * omega_A)
    throw InvalidParameter("initial state splitting differs from the contact's omega_A");
  if (bath.model == DynamicsModel::tcl2)
    return std::make_unique<Tcl2Evolver>(initial, tcl2_source(bath, omega_A, cfg.quad), cfg.dt,
                                         cfg.t_max);
  return std::make_unique<MarkovianEvolver>(initial, bath, cfg.dt, cfg.t_max);
}

Trajectory record_trajectory(ContactEvolver& evolver, double reference_temperature,
                             int sample_every) {
  Trajectory traj;
  traj.omega = evolver.omega();
  traj.reference_temperature = reference_temperature;
  traj.push_back(evolver.time(), evolver.state());
  std::size_t n = 0;
  while (evolver.advance()) {
    ++n;
    if (n % static_cast<std::size_t>(sample_every) == 0 || evolver.finished())
      traj.push_back(evolver.time(), evolver.state());
  }
  return traj;
}

Trajectory evolve_nonmarkovian(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                               const IntegratorConfig& cfg) {
  if (bath.model != DynamicsModel::tcl2)
    throw InvalidParameter("evolve_nonmarkovian requires a TCL2 bath");
  cfg.validate(omega_A);
  auto ev = make_evolver(initial, bath, omega_A, cfg);
  return record_trajectory(*ev, bath.temperature, cfg.sample_every);
}

Trajectory evolve_nonmarkovian(const TwoLevelState& initial, const CoefficientFn& coefficients,
                               double reference_temperature, const IntegratorConfig& cfg) {
  cfg.validate(initial.omega);
  Tcl2Evolver ev(initial, coefficients, cfg.dt, cfg.t_max);
  return record_trajectory(ev, reference_temperature, cfg.sample_every);
}

std::vector<std::complex<double>> evolve_coherence(const TwoLevelState& initial,
                                                   const CoefficientFn& coefficients,
                                                   const IntegratorConfig& cfg) {
  cfg.validate(initial.omega);
  Tcl2Evolver ev(initial, coefficients, cfg.dt, cfg.t_max);
  std::vector<std::complex<double>> out{ev.state().coherence};
  std::size_t n = 0;
  while (ev.advance()) {
    ++n;
    if (n % static_cast<std::size_t>(cfg.sample_every) == 0 || ev.finished())
      out.push_back(ev.state().coherence);
  }
  return out;
}

std::vector<std::complex<double>> evolve_coherence(const TwoLevelState& initial,
                                                   const BathSpec& bath, double omega_A,
                                                   const IntegratorConfig& cfg) {
  if (bath.model != DynamicsModel::tcl2)
    throw InvalidParameter("evolve_coherence requires a TCL2 bath");
  if (std::abs(initial.omega - omega_A) > 1e-12 * omega_A)
    throw InvalidParameter("initial state splitting differs from the contact's omega_A");
  return evolve_coherence(initial, tcl2_source(bath, omega_A, cfg.quad), cfg);
}

Trajectory evolve_markovian(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                            const IntegratorConfig& cfg) {
  if (bath.model != DynamicsModel::lindblad_reference)
    throw InvalidParameter("evolve_markovian requires a Lindblad reference bath");
  cfg.validate(omega_A);
  auto ev = make_evolver(initial, bath, omega_A, cfg);
  return record_trajectory(*ev, bath.temperature, cfg.sample_every);
}

// ---------------------------------------------------------------------------

namespace {

// int_{t_j}^{t_{j+1}} f on a uniform grid of n nodes from four neighbouring
// samples f(k), one-sided at the ends. Fourth order.
template <class F>
auto interval_integral(const F& f, std::size_t j, std::size_t n, double h) {
  if (n < 4) return 0.5 * h * (f(j) + f(j + 1));
  if (j == 0) return h / 24.0 * (9.0 * f(0) + 19.0 * f(1) - 5.0 * f(2) + f(3));
  if (j + 2 >= n) return h / 24.0 * (f(j - 2) - 5.0 * f(j - 1) + 19.0 * f(j) + 9.0 * f(j + 1));
  return h / 24.0 * (-f(j - 1) + 13.0 * f(j) + 13.0 * f(j + 1) - f(j + 2));
}

}  // namespace

Trajectory evolve_oracle(const TwoLevelState& initial, const CoefficientFn& coefficients,
                         double reference_temperature, const IntegratorConfig& cfg) {
  cfg.validate(initial.omega);
  constexpr std::size_t kRefine = 4;
  const std::size_t steps = step_count(cfg.t_max, cfg.dt);
  const std::size_t nodes = steps * kRefine + 1;
  const double h = cfg.dt / static_cast<double>(kRefine);
  const double omega = initial.omega;

  std::vector<double> t(nodes), a(nodes), b(nodes);
  std::vector<std::complex<double>> rate(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    t[j] = h * static_cast<double>(j);
    const Tcl2Coefficients c = coefficients(t[j]);
    a[j] = c.decay_a;
    b[j] = c.drift_b;
    rate[j] = c.coherence_rate();
  }

  // A_j = int_0^{t_j} a,  R_j = int_0^{t_j} (G1 + conj G2)
  std::vector<double> A(nodes, 0.0);
  std::vector<std::complex<double>> R(nodes, 0.0);
  auto a_at = [&](std::size_t k) { return a[k]; };
  auto rate_at = [&](std::size_t k) { return rate[k]; };
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    A[j + 1] = A[j] + interval_integral(a_at, j, nodes, h);
    R[j + 1] = R[j] + interval_integral(rate_at, j, nodes, h);
  }

  // K_j = int_0^{t_j} exp(A(s) - A_j) b(s) ds, propagated with a moving
  // reference point so the exponentials stay bounded.
  const double sz0 = sigma_z_expectation(initial);
  Trajectory traj;
  traj.omega = omega;
  traj.reference_temperature = reference_temperature;
  auto emit = [&](std::size_t j, double K) {
    const double sz = sz0 * std::exp(-A[j]) - K;
    check_positivity(t[j], sz, omega);
    std::complex<double> c{};
    if (!initial.diagonal()) c = initial.coherence * std::exp(-R[j]) * std::polar(1.0, -omega * t[j]);
    traj.push_back(t[j], TwoLevelState{omega, 0.5 * (1.0 + sz), c});
  };

  emit(0, 0.0);
  double K = 0.0;
  const std::size_t stride = kRefine * static_cast<std::size_t>(cfg.sample_every);
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    auto weighted_b = [&](std::size_t k) { return std::exp(A[k] - A[j + 1]) * b[k]; };
    const double local = interval_integral(weighted_b, j, nodes, h);
    K = std::exp(A[j] - A[j + 1]) * K + local;
    if ((j + 1) % stride == 0 || j + 2 == nodes) emit(j + 1, K);
  }
  return traj;
}

Trajectory evolve_oracle(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                         const IntegratorConfig& cfg) {
  if (bath.model != DynamicsModel::tcl2)
    throw InvalidParameter("evolve_oracle requires a TCL2 bath");
  if (std::abs(initial.omega - omega_A) > 1e-12 * omega_A)
    throw InvalidParameter("initial state splitting differs from the contact's omega_A");
  return evolve_oracle(initial, tcl2_source(bath, omega_A, cfg.quad), bath.temperature, cfg);
}

}  // namespace qotto
