#pragma once

// Bosonic reservoir: spectral density, thermal occupation, and the
// time-dependent second-order (TCL2) rates Gamma_1(t), Gamma_2(t).

#include <array>
#include <complex>
#include <map>
#include <string_view>
#include <vector>

#include "qotto/quadrature.hpp"

namespace qotto {

// J(w) = gamma * w * exp(-w^2 / lambda^2)
struct SpectralDensity {
  double gamma = 0.1;
  double lambda = 1.0;

  // The second-order equations assume weak coupling; above this value the
  // results are reported but flagged.
  static constexpr double kWeakCouplingLimit = 0.2;
  bool weak_coupling_advisory() const { return gamma > kWeakCouplingLimit; }

  friend bool operator==(const SpectralDensity&, const SpectralDensity&) = default;
};

enum class DynamicsModel { tcl2, lindblad_reference };

std::string_view to_string(DynamicsModel m);
DynamicsModel parse_dynamics_model(std::string_view name);

struct BathSpec {
  double temperature = 1.0;
  SpectralDensity spectral;
  DynamicsModel model = DynamicsModel::tcl2;

  void validate() const;

  friend bool operator==(const BathSpec&, const BathSpec&) = default;
};

struct Tcl2Coefficients {
  std::complex<double> gamma1{};
  std::complex<double> gamma2{};
  double decay_a = 0.0;  // 2 Re[Gamma_1 + Gamma_2]
  double drift_b = 0.0;  // 2 Re[Gamma_1 - Gamma_2]
  double error_estimate = 0.0;

  // d<sigma_->/dt = -(i omega_A + coherence_rate) <sigma_->
  std::complex<double> coherence_rate() const { return gamma1 + std::conj(gamma2); }
};

struct MarkovRates {
  double decay_a = 0.0;
  double drift_b = 0.0;
};

double spectral_density(double omega, const SpectralDensity& sd);

double bose_occupation(double omega, double temperature);

// n(w) J(w), continuous at w = 0 where it tends to gamma * T.
double weighted_emission(double omega, const BathSpec& bath);

// Upper frequency limit of the bath integrals, in units of lambda.
inline constexpr double kOmegaMaxFactor = 8.0;

// Gamma_1(t) = int_0^inf dw (n+1) J [sin(D t)/D + i (1 - cos(D t))/D], D = omega_A - w
// Gamma_2(t) = int_0^inf dw  n    J [sin(D't)/D' + i (1 - cos(D't))/D'], D' = -D
// The time integral is done analytically; the frequency integral by
// adaptive quadrature on [0, 8 lambda] with panels no wider than pi/(4t).
// Throws NumericalFailure if the requested tolerance is not reached.
Tcl2Coefficients tcl2_coefficients(double t, double omega_A, const BathSpec& bath,
                                   const QuadratureOptions& opts = {});

// tcl2_coefficients for one (omega_A, bath) pair, remembering the
// time-independent factors n J and J at the nodes of each initial panel
// layout it has used. Initial panel widths are lambda/4 halved until they are
// no wider than pi/(4t), so successive times share layouts. Results are
// bitwise identical to tcl2_coefficients. Not safe for concurrent use; give
// each task its own instance.
class Tcl2Kernel {
 public:
  Tcl2Kernel(double omega_A, const BathSpec& bath, const QuadratureOptions& opts = {});

  Tcl2Coefficients operator()(double t);

 private:
  using NodeFactors = std::array<double, 2>;  // n J, J
  const std::vector<NodeFactors>& layout(int level);
  NodeFactors factors(double w) const;

  double omega_A_;
  BathSpec bath_;
  QuadratureOptions opts_;
  std::map<int, std::vector<NodeFactors>> layouts_;
};

// t -> infinity limit of tcl2_coefficients, used as the Markovian reference:
// decay_a = 2 pi J(omega_A) (2 n(omega_A) + 1), drift_b = 2 pi J(omega_A).
MarkovRates lindblad_rates(double omega_A, const BathSpec& bath);

}  // namespace qotto
