#include "qotto/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qotto/error.hpp"

namespace qotto {

namespace {

// |<sigma_z>| beyond this is treated as a pure state for x_ratio purposes.

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite, got " << v;
    throw InvalidParameter(os.str());
  }
}

void require_diagonal(const TwoLevelState& s) {
  if (!s.diagonal())
    throw UndefinedTemperature(
        "effective temperature undefined for a state with nonzero coherence");
}

}  // namespace

TwoLevelState TwoLevelState::make(double omega, double p_excited,
                                  std::complex<double> coherence) {
  require_positive(omega, "omega");
  if (!(p_excited >= 0.0 && p_excited <= 1.0)) {
    std::ostringstream os;
    os << "p_excited must lie in [0,1], got " << p_excited;
    throw InvalidParameter(os.str());
  }
  if (std::norm(coherence) > p_excited * (1.0 - p_excited) * (1.0 + 1e-12)) {
    throw InvalidParameter("|coherence|^2 exceeds p(1-p): state is not positive");
  }
  return TwoLevelState{omega, p_excited, coherence};
}

double excited_probability(double x) {
  // 1/(1+e^x), written so that neither branch overflows.
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

TwoLevelState thermal_state(double omega, double temperature) {
  require_positive(omega, "omega");
  require_positive(temperature, "temperature");
  return TwoLevelState{omega, excited_probability(omega / temperature), {}};
}

double sigma_z_expectation(const TwoLevelState& s) { return 2.0 * s.p_excited - 1.0; }

double x_ratio(const TwoLevelState& s) {
  require_diagonal(s);
  // Only a pinned population diverges; tiny p keeps full precision in the
  // log form below.
  if (!(s.p_excited > 0.0 && s.p_excited < 1.0)) {
    std::ostringstream os;
    os << "omega/T_eff diverges: p_excited = " << s.p_excited;
    throw DivergentRatio(os.str());
  }
  // -2 atanh(2p-1) = ln(1-p) - ln(p)
  return std::log1p(-s.p_excited) - std::log(s.p_excited);
}

double effective_temperature(const TwoLevelState& s) {
  const double x = x_ratio(s);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  return s.omega / x;
}

double mean_energy(const TwoLevelState& s) {
  return 0.5 * s.omega * sigma_z_expectation(s);
}

double von_neumann_entropy(const TwoLevelState& s) {
  if (s.diagonal()) return -xlogx(s.p_excited) - xlogx(1.0 - s.p_excited);
  const double sz = sigma_z_expectation(s);
  const double r = std::min(1.0, std::sqrt(sz * sz + 4.0 * std::norm(s.coherence)));
  return -xlogx(0.5 * (1.0 + r)) - xlogx(0.5 * (1.0 - r));
}

double relative_entropy(const TwoLevelState& a, const TwoLevelState& b) {
  if (!b.diagonal())
    throw InvalidParameter("relative_entropy: reference state must be diagonal");
  const double pa = a.p_excited;
  const double pb = b.p_excited;
  const bool support_ok = (pb > 0.0 || pa == 0.0) && (pb < 1.0 || pa == 1.0);
  if (!support_ok || (!a.diagonal() && (pb <= 0.0 || pb >= 1.0))) {
    std::ostringstream os;
    os << "relative entropy diverges: support mismatch (p_a=" << pa << ", p_b=" << pb << ")";
    throw DivergentRelativeEntropy(os.str());
  }
  if (a.diagonal()) {
    double d = 0.0;
    if (pa > 0.0) d += pa * std::log(pa / pb);
    if (pa < 1.0) d += (1.0 - pa) * std::log((1.0 - pa) / (1.0 - pb));
    return std::max(d, 0.0);
  }
  const double cross = pa * std::log(pb) + (1.0 - pa) * std::log1p(-pb);
  return std::max(-von_neumann_entropy(a) - cross, 0.0);
}

EntropyLedger entropy_ledger(const TwoLevelState& s, const TwoLevelState& ref) {
  return {von_neumann_entropy(s), relative_entropy(s, ref)};
}

double log_partition(double omega, double temperature) {
  const double y = 0.5 * omega / temperature;
  const double ay = std::abs(y);
  // ln(2 cosh y) = |y| + ln(1 + e^{-2|y|})
  return ay + std::log1p(std::exp(-2.0 * ay));
}

}  // namespace qotto
