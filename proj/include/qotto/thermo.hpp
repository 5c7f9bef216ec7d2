#pragma once

// Closed-form thermodynamics of a two-level system with H = (omega/2) sigma_z.
// Natural units: k_B = hbar = 1.

#include <complex>

namespace qotto {

// Working-medium state. The density matrix is
//   [[p_excited, coherence], [conj(coherence), 1 - p_excited]]
// with coherence = <sigma_->.
struct TwoLevelState {
  double omega = 1.0;
  double p_excited = 0.5;
  std::complex<double> coherence{};

  bool diagonal() const { return coherence == std::complex<double>{}; }

  // Validates omega > 0, 0 <= p <= 1 and |c|^2 <= p(1-p).
  static TwoLevelState make(double omega, double p_excited,
                            std::complex<double> coherence = {});

  friend bool operator==(const TwoLevelState&, const TwoLevelState&) = default;
};

struct EntropyLedger {
  double von_neumann = 0.0;
  double rel_entropy_to_ref = 0.0;
};

// Excited-state probability of a thermal state with omega/T = x.
double excited_probability(double x);

TwoLevelState thermal_state(double omega, double temperature);

double sigma_z_expectation(const TwoLevelState& s);

// omega / T_eff = -2 atanh(<sigma_z>) = ln((1-p)/p).
double x_ratio(const TwoLevelState& s);

double effective_temperature(const TwoLevelState& s);

double mean_energy(const TwoLevelState& s);

double von_neumann_entropy(const TwoLevelState& s);

// S(a||b) = -Tr[a ln b] - S_v(a). b must be diagonal; a may carry coherence.
double relative_entropy(const TwoLevelState& a, const TwoLevelState& b);

EntropyLedger entropy_ledger(const TwoLevelState& s, const TwoLevelState& ref);

// ln Z for H = (omega/2) sigma_z, Z = 2 cosh(omega / 2T).
double log_partition(double omega, double temperature);

}  // namespace qotto
