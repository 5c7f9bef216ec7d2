#pragma once

// Evolution of the two-level state during a bath contact at fixed splitting.
//
//   d<sigma_z>/dt = -a(t) <sigma_z> - b(t)
//   d<sigma_->/dt = -(i omega_A + Gamma_1 + conj(Gamma_2)) <sigma_->
//
// with a = 2 Re[Gamma_1 + Gamma_2], b = 2 Re[Gamma_1 - Gamma_2].

#include <complex>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "qotto/bath.hpp"
#include "qotto/quadrature.hpp"
#include "qotto/thermo.hpp"

namespace qotto {

struct IntegratorConfig {
  double dt = 0.01;
  double t_max = 1.0;
  int sample_every = 1;
  double oracle_tol = 1e-6;
  QuadratureOptions quad;

  // dt = 2 pi / (80 omega_A), t_max = 100 / a_inf of the contact.
  static IntegratorConfig defaults(double omega_A, const BathSpec& bath);

  // dt > 0, t_max >= dt, dt <= 2 pi / (40 omega_fastest).
  void validate(double omega_fastest) const;
};

struct Trajectory {
  double omega = 0.0;
  double reference_temperature = 0.0;
  std::vector<double> times;
  std::vector<double> sigma_z;
  std::vector<std::complex<double>> coherence;
  std::vector<double> x_ratio;  // NaN where undefined (coherent state)
  std::vector<double> rel_entropy_to_eq;
  std::vector<double> s_von_neumann;

  std::size_t size() const { return times.size(); }
  TwoLevelState state(std::size_t i) const;
  void push_back(double t, const TwoLevelState& s);
};

// Time-dependent rates seen by the system. The real bath uses
// tcl2_coefficients; tests substitute synthetic sources.
using CoefficientFn = std::function<Tcl2Coefficients(double)>;

CoefficientFn tcl2_source(const BathSpec& bath, double omega_A, const QuadratureOptions& quad);

// Time-independent rates; the coherence rate is a/2 + i frequency_shift.
CoefficientFn constant_source(double decay_a, double drift_b, double frequency_shift = 0.0);

// Steps a single contact forward on the fixed grid t_n = n dt and answers
// state queries anywhere inside the retained recent steps.
class ContactEvolver {
 public:
  virtual ~ContactEvolver() = default;

  double time() const { return time_; }
  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  double omega() const { return omega_; }
  const TwoLevelState& state() const { return state_; }
  bool finished() const { return time_ >= horizon_ - 1e-12 * dt_; }

  // Advances one step; returns false (and does nothing) past the horizon.
  bool advance();

  // Valid for t in [earliest_time(), time()].
  virtual TwoLevelState state_at(double t) const = 0;
  virtual double earliest_time() const = 0;

  // Number of completed steps kept for state_at (at least 1).
  void retain_steps(std::size_t n) { retain_ = n < 1 ? 1 : n; }

 protected:
  ContactEvolver(const TwoLevelState& initial, double dt, double horizon);
  virtual TwoLevelState step_to(std::size_t n) = 0;

  double omega_;
  double dt_;
  double horizon_;
  std::size_t step_ = 0;
  std::size_t retain_ = 1;
  double time_ = 0.0;
  TwoLevelState state_;
};

// Classical fourth-order Runge-Kutta with cubic Hermite dense output.
class Tcl2Evolver final : public ContactEvolver {
 public:
  Tcl2Evolver(const TwoLevelState& initial, CoefficientFn coefficients, double dt, double horizon);

  TwoLevelState state_at(double t) const override;
  double earliest_time() const override;

 private:
  struct Step {
    double t0, t1;
    double sz0, sz1, dsz0, dsz1;
    // coherence in the frame rotating at omega_A
    std::complex<double> c0, c1, dc0, dc1;
  };

  TwoLevelState step_to(std::size_t n) override;
  TwoLevelState make_state(double t, double sz, std::complex<double> c_rot) const;

  CoefficientFn coefficients_;
  Tcl2Coefficients current_coef_;
  double sz_;
  std::complex<double> c_rot_;
  std::deque<Step> history_;
};

// Exact exponential relaxation with the t -> infinity rates.
class MarkovianEvolver final : public ContactEvolver {
 public:
  MarkovianEvolver(const TwoLevelState& initial, const BathSpec& bath, double dt, double horizon);

  TwoLevelState state_at(double t) const override;
  double earliest_time() const override { return 0.0; }

 private:
  TwoLevelState step_to(std::size_t n) override;

  TwoLevelState initial_;
  MarkovRates rates_;
  double sz_eq_;
};

// Chooses the evolver matching bath.model.
std::unique_ptr<ContactEvolver> make_evolver(const TwoLevelState& initial, const BathSpec& bath,
                                             double omega_A, const IntegratorConfig& cfg);

// Runs the evolver to its horizon, sampling every cfg.sample_every steps.
Trajectory record_trajectory(ContactEvolver& evolver, double reference_temperature,
                             int sample_every);

Trajectory evolve_nonmarkovian(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                               const IntegratorConfig& cfg);

Trajectory evolve_nonmarkovian(const TwoLevelState& initial, const CoefficientFn& coefficients,
                               double reference_temperature, const IntegratorConfig& cfg);

std::vector<std::complex<double>> evolve_coherence(const TwoLevelState& initial,
                                                   const BathSpec& bath, double omega_A,
                                                   const IntegratorConfig& cfg);

std::vector<std::complex<double>> evolve_coherence(const TwoLevelState& initial,
                                                   const CoefficientFn& coefficients,
                                                   const IntegratorConfig& cfg);

Trajectory evolve_markovian(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                            const IntegratorConfig& cfg);

// Integrating-factor solution
//   sz(t) = exp(-A(t)) [sz(0) - int_0^t exp(A(s)) b(s) ds],  A(t) = int_0^t a,
// with fourth-order composite quadrature on a grid four times finer than
// cfg.dt. Samples land on the same times as the stepper's.
Trajectory evolve_oracle(const TwoLevelState& initial, const BathSpec& bath, double omega_A,
                         const IntegratorConfig& cfg);

Trajectory evolve_oracle(const TwoLevelState& initial, const CoefficientFn& coefficients,
                         double reference_temperature, const IntegratorConfig& cfg);

}  // namespace qotto
