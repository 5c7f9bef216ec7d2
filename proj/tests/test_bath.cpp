#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "qotto/bath.hpp"
#include "qotto/error.hpp"

using namespace qotto;
using doctest::Approx;

TEST_CASE("spectral density") {
  const SpectralDensity sd{0.1, 20.8};
  CHECK(spectral_density(0.0, sd) == 0.0);
  CHECK(spectral_density(5.2, sd) == Approx(fixtures::kJ52).epsilon(1e-15));
  CHECK(spectral_density(20.8, sd) == Approx(0.1 * 20.8 / std::numbers::e).epsilon(1e-15));
  CHECK_THROWS_AS(spectral_density(-1.0, sd), InvalidParameter);
  CHECK_FALSE(sd.weak_coupling_advisory());
  CHECK(SpectralDensity{0.3, 1.0}.weak_coupling_advisory());
}

TEST_CASE("bose occupation") {
  CHECK(bose_occupation(5.2, 2.0) == Approx(fixtures::kN52).epsilon(1e-15));
  CHECK(bose_occupation(2.6 * 7.0, 7.0) == Approx(fixtures::kN52).epsilon(1e-14));
  CHECK(bose_occupation(3.0 * std::numbers::ln2, 3.0) == Approx(1.0).epsilon(1e-14));
  CHECK(bose_occupation(50.0, 1.0) == Approx(std::exp(-50.0)).epsilon(1e-12));
  CHECK(bose_occupation(800.0, 1.0) == 0.0);
  CHECK_THROWS_AS(bose_occupation(0.0, 1.0), InvalidParameter);
}

TEST_CASE("weighted emission") {
  const BathSpec b = fixtures::hot_bath();
  CHECK(weighted_emission(0.0, b) == Approx(0.2).epsilon(1e-15));
  CHECK(weighted_emission(5.2, b) == Approx(fixtures::kNJ52).epsilon(1e-14));
  CHECK(weighted_emission(1e-8, b) == Approx(weighted_emission(0.0, b)).epsilon(1e-7));
  CHECK(weighted_emission(1e-7, b) == Approx(weighted_emission(0.0, b)).epsilon(1e-6));
  CHECK(weighted_emission(5.2, BathSpec{1e-3, {0.1, 20.8}, DynamicsModel::tcl2}) == 0.0);
}

TEST_CASE("lindblad rates") {
  const auto r = lindblad_rates(5.2, fixtures::hot_bath());
  CHECK(r.decay_a == Approx(fixtures::kDecayInf).epsilon(1e-14));
  CHECK(r.drift_b == Approx(fixtures::kDriftInf).epsilon(1e-14));
  CHECK(-r.drift_b / r.decay_a == Approx(-std::tanh(1.3)).epsilon(1e-14));
  const auto cold = lindblad_rates(5.2, BathSpec{1e-3, {0.1, 20.8}, DynamicsModel::tcl2});
  CHECK(cold.decay_a == Approx(2.0 * std::numbers::pi * fixtures::kJ52).epsilon(1e-14));
}

TEST_CASE("model names") {
  CHECK(parse_dynamics_model("tcl2") == DynamicsModel::tcl2);
  CHECK(parse_dynamics_model("lindblad") == DynamicsModel::lindblad_reference);
  CHECK(to_string(DynamicsModel::lindblad_reference) == "lindblad");
  CHECK_THROWS_AS(parse_dynamics_model("redfield"), InvalidParameter);
}

TEST_CASE("tcl2 coefficients at t = 0 vanish") {
  const auto c = tcl2_coefficients(0.0, 5.2, fixtures::hot_bath());
  CHECK(c.gamma1 == std::complex<double>{});
  CHECK(c.gamma2 == std::complex<double>{});
  CHECK(c.decay_a == 0.0);
  CHECK_THROWS_AS(tcl2_coefficients(-1.0, 5.2, fixtures::hot_bath()), InvalidParameter);
}

TEST_CASE("tcl2 coefficients against independent quadrature") {
  for (const auto& k : fixtures::kKernel) {
    CAPTURE(k.t);
    const auto c = tcl2_coefficients(k.t, 5.2, fixtures::hot_bath());
    CHECK(std::abs(c.decay_a - k.a) <= 1e-8);
    CHECK(std::abs(c.drift_b - k.b) <= 1e-8);
    CHECK(std::abs(c.gamma1.real() - k.g1r) <= 1e-8);
    CHECK(std::abs(c.gamma1.imag() - k.g1i) <= 1e-8);
    CHECK(std::abs(c.gamma2.real() - k.g2r) <= 1e-8);
    CHECK(std::abs(c.gamma2.imag() - k.g2i) <= 1e-8);
    CHECK(std::abs(c.decay_a - 2.0 * (c.gamma1 + c.gamma2).real()) <= 1e-14);
    CHECK(std::abs(c.drift_b - 2.0 * (c.gamma1 - c.gamma2).real()) <= 1e-14);
    CHECK(c.error_estimate < 1e-8);
  }
}

TEST_CASE("real parts match direct real quadrature") {
  const BathSpec b = fixtures::hot_bath();
  for (double t : {0.3, 4.0}) {
    auto f = [&](double w) -> std::array<double, 2> {
      const double d = 5.2 - w;
      const double s = std::abs(d * t) < 1e-6 ? t : std::sin(d * t) / d;
      return {weighted_emission(w, b) * s, spectral_density(w, b.spectral) * s};
    };
    const auto q = integrate<2>(f, 0.0, 8.0 * 20.8, std::numbers::pi / (4.0 * t), QuadratureOptions{1e-13, 1e-13, 20000});
    const auto c = tcl2_coefficients(t, 5.2, b);
    CHECK(std::abs(c.decay_a - 2.0 * (2.0 * q.value[0] + q.value[1])) <= 1e-10);
    CHECK(std::abs(c.drift_b - 2.0 * q.value[1]) <= 1e-10);
  }
}

TEST_CASE("cached kernel is bitwise identical to the free function") {
  Tcl2Kernel k(5.2, fixtures::hot_bath());
  for (double t : {0.01, 0.7, 3.0, 0.7, 12.0}) {
    const auto a = k(t);
    const auto b = tcl2_coefficients(t, 5.2, fixtures::hot_bath());
    CHECK(a.gamma1 == b.gamma1);
    CHECK(a.gamma2 == b.gamma2);
  }
}

TEST_CASE("asymptotic rates") {
  // The oscillating remainder decays like 1/t.
  for (double t : {50.0 / 5.2, 100.0 / 5.2, 200.0 / 5.2, 100.0}) {
    CAPTURE(t);
    const auto c = tcl2_coefficients(t, 5.2, fixtures::hot_bath());
    CHECK(std::abs(c.decay_a - fixtures::kDecayInf) <= 0.01 * fixtures::kDecayInf);
    CHECK(std::abs(-c.drift_b / c.decay_a + std::tanh(1.3)) <= 0.04 / t);
  }
}

TEST_CASE("equilibrium ratio stays inside (-1, 0)") {
  for (int i = 1; i <= 60; ++i) {
    const double t = 0.05 * i;
    const auto c = tcl2_coefficients(t, 5.2, fixtures::hot_bath());
    REQUIRE(c.decay_a > 0.0);
    const double r = -c.drift_b / c.decay_a;
    REQUIRE(r > -1.0);
    REQUIRE(r < 0.0);
  }
}

TEST_CASE("halving the tolerance stays within the error estimate") {
  for (double t : {0.2, 1.5, 6.0}) {
    const auto loose = tcl2_coefficients(t, 5.2, fixtures::hot_bath(), {1e-8, 1e-6, 20000});
    const auto tight = tcl2_coefficients(t, 5.2, fixtures::hot_bath(), {5e-9, 5e-7, 20000});
    const double bound = std::max(loose.error_estimate, 1e-15);
    CHECK(std::abs(loose.gamma1 - tight.gamma1) <= bound);
    CHECK(std::abs(loose.gamma2 - tight.gamma2) <= bound);
  }
}

TEST_CASE("unreachable tolerance is a numerical failure") {
  try {
    tcl2_coefficients(1.0, 5.2, fixtures::hot_bath(), {1e-30, 1e-30, 200});
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure& e) {
    CHECK(e.error_estimate() > 0.0);
  }
}
