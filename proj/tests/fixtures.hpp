#pragma once

// Reference values computed independently at 30 digits (closed forms and
// mpmath quadrature) and frozen here.

#include "qotto/bath.hpp"
#include "qotto/cycle.hpp"

namespace fixtures {

inline constexpr double kP25 = 0.07585818002124355;   // 1/(1+e^2.5)
inline constexpr double kP26 = 0.06913842034334681;   // 1/(1+e^2.6)
inline constexpr double kSigmaZ25 = -0.8482836399575129;
inline constexpr double kEnergy25 = -1.0603545499468911;
inline constexpr double kEntropyP25 = 0.2685351843456585;
inline constexpr double kKlColdHot = 3.407756772445468e-4;  // S(P(2.5) || P(2.6))
inline constexpr double kKlHotCold = 3.312002905451277e-4;  // S(P(2.6) || P(2.5))

inline constexpr double kW = 0.018143351130321197;
inline constexpr double kQh = 0.03494275032506304;
inline constexpr double kQc = -0.016799399194741848;
inline constexpr double kDeltaSv = 0.017130599485286975;
inline constexpr double kCostH = 6.815513544890936e-4;
inline constexpr double kCostC = 3.312002905451277e-4;
inline constexpr double kQhTilde = 0.03426119897057395;

inline constexpr double kJ52 = 0.4884947926630074;
inline constexpr double kN52 = 0.08023275177893807;
inline constexpr double kNJ52 = 0.03919328144503489;
inline constexpr double kDecayInf = 3.5618206041251417;
inline constexpr double kDriftInf = 3.069303303893947;

// Hot bath of the reference cycle at finite t: t, a, b, Re G1, Im G1, Re G2, Im G2
struct KernelPoint {
  double t, a, b, g1r, g1i, g2r, g2i;
};
inline constexpr KernelPoint kKernel[] = {
    {0.05, 2.0678488689818377, 1.9413301249274993, 1.0022947484773342, -0.3215213728533469,
     0.031629686013584608, -0.001926326966344138},
    {0.5, 3.7288844484632743, 2.9601549560614298, 1.672259851131176, -2.0324107875929937,
     0.19218237310046112, -0.13964428963516095},
    {2.0, 3.6095549001320441, 3.0759565560047848, 1.6713778640342072, -1.9643860815294887,
     0.13339958603181483, -0.1818961861205308},
};

inline qotto::BathSpec hot_bath(qotto::DynamicsModel m = qotto::DynamicsModel::tcl2) {
  return {2.0, {0.1, 20.8}, m};
}
inline qotto::BathSpec cold_bath(qotto::DynamicsModel m = qotto::DynamicsModel::tcl2) {
  return {1.0, {0.1, 10.0}, m};
}
inline qotto::OttoScenario reference_scenario() {
  return qotto::OttoScenario::with_defaults(5.2, 2.5, hot_bath(), cold_bath());
}

}  // namespace fixtures
