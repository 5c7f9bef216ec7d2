#include "qotto/bath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qotto/error.hpp"

namespace qotto {

namespace {

// Below this |D| t the sinc-type kernels use their Taylor limits.
constexpr double kSeriesThreshold = 1e-6;

// sin(u)/D and (1 - cos u)/D from the half-angle sine and cosine of u = D t.
struct Kernel {
  double sine;
  double cosine;
};

Kernel time_kernel(double delta, double t, double half_sin, double half_cos) {
  const double u = delta * t;
  if (std::abs(u) < kSeriesThreshold) return {t * (1.0 - u * u / 6.0), t * (0.5 * u)};
  return {2.0 * half_sin * half_cos / delta, 2.0 * half_sin * half_sin / delta};
}

}  // namespace

std::string_view to_string(DynamicsModel m) {
  switch (m) {
    case DynamicsModel::tcl2:
      return "tcl2";
    case DynamicsModel::lindblad_reference:
      return "lindblad";
  }
  return "?";
}

DynamicsModel parse_dynamics_model(std::string_view name) {
  if (name == "tcl2") return DynamicsModel::tcl2;
  if (name == "lindblad" || name == "markovian") return DynamicsModel::lindblad_reference;
  throw InvalidParameter("unknown dynamics model '" + std::string(name) +
                         "' (expected tcl2 or lindblad)");
}

void BathSpec::validate() const {
  std::ostringstream os;
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    os << "temperature must be positive, got " << temperature;
  else if (!(spectral.gamma > 0.0) || !std::isfinite(spectral.gamma))
    os << "gamma must be positive, got " << spectral.gamma;
  else if (!(spectral.lambda > 0.0) || !std::isfinite(spectral.lambda))
    os << "lambda must be positive, got " << spectral.lambda;
  else
    return;
  throw InvalidParameter(os.str());
}

double spectral_density(double omega, const SpectralDensity& sd) {
  if (omega < 0.0) throw InvalidParameter("spectral_density: omega must be >= 0");
  const double r = omega / sd.lambda;
  return sd.gamma * omega * std::exp(-r * r);
}

double bose_occupation(double omega, double temperature) {
  if (!(omega > 0.0) || !(temperature > 0.0))
    throw InvalidParameter("bose_occupation: omega and temperature must be positive");
  return 1.0 / std::expm1(omega / temperature);
}

double weighted_emission(double omega, const BathSpec& bath) {
  if (omega < 0.0) throw InvalidParameter("weighted_emission: omega must be >= 0");
  const double T = bath.temperature;
  const double r = omega / bath.spectral.lambda;
  const double gauss = std::exp(-r * r);
  const double y = omega / T;
  if (y < 1e-8) {
    // w / (e^{w/T} - 1) -> T (1 - y/2)
    return bath.spectral.gamma * T * (1.0 - 0.5 * y) * gauss;
  }
  return bath.spectral.gamma * omega * gauss / std::expm1(y);
}

Tcl2Kernel::Tcl2Kernel(double omega_A, const BathSpec& bath, const QuadratureOptions& opts)
    : omega_A_(omega_A), bath_(bath), opts_(opts) {
  if (!(omega_A > 0.0)) throw InvalidParameter("tcl2_coefficients: omega_A must be positive");
}

Tcl2Kernel::NodeFactors Tcl2Kernel::factors(double w) const {
  const double r = w / bath_.spectral.lambda;
  const double gauss = std::exp(-r * r);
  const double j = bath_.spectral.gamma * w * gauss;
  const double y = w / bath_.temperature;
  const double nj =
      y < 1e-8 ? bath_.spectral.gamma * bath_.temperature * (1.0 - 0.5 * y) * gauss : j / std::expm1(y);
  return {nj, j};
}

namespace {

int layout_level(double t, double lambda) {
  const double cap = std::numbers::pi / (4.0 * t);
  int level = 0;
  while (0.25 * lambda / std::ldexp(1.0, level) > cap) ++level;
  return level;
}

std::size_t layout_panels(int level) { return std::size_t{32} << level; }

}  // namespace

const std::vector<Tcl2Kernel::NodeFactors>& Tcl2Kernel::layout(int level) {
  auto it = layouts_.find(level);
  if (it != layouts_.end()) return it->second;
  const double hi = kOmegaMaxFactor * bath_.spectral.lambda;
  const std::size_t n = layout_panels(level);
  const double width = hi / static_cast<double>(n);
  std::vector<NodeFactors> v;
  v.reserve(15 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = width * static_cast<double>(i);
    const double b = (i + 1 == n) ? hi : width * static_cast<double>(i + 1);
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    v.push_back(factors(c));
    for (std::size_t j = 0; j < 7; ++j) {
      v.push_back(factors(c - h * detail::kXgk[j]));
      v.push_back(factors(c + h * detail::kXgk[j]));
    }
  }
  return layouts_.emplace(level, std::move(v)).first->second;
}

Tcl2Coefficients Tcl2Kernel::operator()(double t) {
  if (t < 0.0) throw InvalidParameter("tcl2_coefficients: t must be >= 0");
  Tcl2Coefficients out;
  if (t == 0.0) return out;

  const double hi = kOmegaMaxFactor * bath_.spectral.lambda;
  const int level = layout_level(t, bath_.spectral.lambda);
  const std::size_t n0 = layout_panels(level);
  const std::vector<NodeFactors>& cached = layout(level);

  // Components: nJ*S, J*S, nJ*C, J*C with S, C the sine/cosine kernels.
  using Values = detail::NodeValues<4>;
  auto node = [&](Values& v, std::size_t idx, double w, const NodeFactors& f, double hs,
                  double hc) {
    const Kernel k = time_kernel(omega_A_ - w, t, hs, hc);
    v[idx] = {f[0] * k.sine, f[1] * k.sine, f[0] * k.cosine, f[1] * k.cosine};
  };
  // Half-angles of the node offsets are shared by every panel of one width;
  // per panel only the centre needs a sine and cosine.
  auto panel = [&](double a, double b, const NodeFactors* f) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, 7> off_s, off_c;
    for (std::size_t j = 0; j < 7; ++j) {
      off_s[j] = std::sin(0.5 * h * detail::kXgk[j] * t);
      off_c[j] = std::cos(0.5 * h * detail::kXgk[j] * t);
    }
    const double phase = 0.5 * (omega_A_ - c) * t;
    const double cs = std::sin(phase);
    const double cc = std::cos(phase);
    Values v;
    node(v, 0, c, f ? f[0] : factors(c), cs, cc);
    for (std::size_t j = 0; j < 7; ++j) {
      // left node: D = (omega_A - c) + h x_j
      const double wl = c - h * detail::kXgk[j];
      const double wr = c + h * detail::kXgk[j];
      node(v, 2 * j + 1, wl, f ? f[2 * j + 1] : factors(wl), cs * off_c[j] + cc * off_s[j],
           cc * off_c[j] - cs * off_s[j]);
      node(v, 2 * j + 2, wr, f ? f[2 * j + 2] : factors(wr), cs * off_c[j] - cc * off_s[j],
           cc * off_c[j] + cs * off_s[j]);
    }
    return detail::gk15_combine<4>(a, b, v);
  };

  const auto q = integrate_layout<4>(
      [&](std::size_t i, double a, double b) { return panel(a, b, &cached[15 * i]); }, n0, 0.0,
      hi, [&](double a, double b) { return panel(a, b, nullptr); }, opts_);
  if (!q.converged) {
    std::ostringstream os;
    os << "TCL2 quadrature did not converge at t=" << t << " (omega_A=" << omega_A_
       << ", T=" << bath_.temperature << "): error estimate " << q.error << " after "
       << q.panels << " panels";
    throw NumericalFailure(os.str(), q.error);
  }
  const auto& [nj_s, j_s, nj_c, j_c] = q.value;
  out.gamma1 = {nj_s + j_s, nj_c + j_c};
  out.gamma2 = {nj_s, -nj_c};
  out.decay_a = 2.0 * (out.gamma1.real() + out.gamma2.real());
  out.drift_b = 2.0 * (out.gamma1.real() - out.gamma2.real());
  out.error_estimate = q.error;
  return out;
}

Tcl2Coefficients tcl2_coefficients(double t, double omega_A, const BathSpec& bath,
                                   const QuadratureOptions& opts) {
  if (t < 0.0) throw InvalidParameter("tcl2_coefficients: t must be >= 0");
  return Tcl2Kernel(omega_A, bath, opts)(t);
}

MarkovRates lindblad_rates(double omega_A, const BathSpec& bath) {
  if (!(omega_A > 0.0)) throw InvalidParameter("lindblad_rates: omega_A must be positive");
  const double j = spectral_density(omega_A, bath.spectral);
  const double n = bose_occupation(omega_A, bath.temperature);
  return {2.0 * std::numbers::pi * j * (2.0 * n + 1.0), 2.0 * std::numbers::pi * j};
}

}  // namespace qotto
