// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "qotto/commands.hpp"
#include "qotto/cycle.hpp"
#include "qotto/dynamics.hpp"
#include "qotto/error.hpp"

using namespace qotto;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const std::string kConfigs = std::string(QOTTO_SOURCE_DIR) + "/configs/";

OttoScenario random_scenario(std::mt19937_64& rng, bool equal_temperatures) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double wh = u(4.5, 6.0);
  const double th = u(1.5, 2.5);
  const double tc = equal_temperatures ? th : th * u(0.5, 1.0);
  const double wc = (wh / th - u(0.01, 0.06)) * tc;
  const double g = u(0.08, 0.12);
  auto s = OttoScenario::with_defaults(wh, wc, BathSpec{th, {g, 4.0 * wh}, DynamicsModel::tcl2},
                                       BathSpec{tc, {g, 4.0 * wc}, DynamicsModel::tcl2});
  s.integrator.t_max = 10.0;
  return s;
}

// x(t) over [0, t_max] from equilibrium: does it swing to both sides of
// x_eq and reach target?
void check_contact(Outcome& o, const char* name, double omega, const BathSpec& bath,
                   double target, const OttoScenario& s) {
  auto cfg = s.integrator;
  cfg.t_max = 20.0;
  const auto traj = evolve_nonmarkovian(thermal_state(omega, bath.temperature), bath, omega, cfg);
  const double x_eq = omega / bath.temperature;
  const auto [lo, hi] = std::minmax_element(traj.x_ratio.begin(), traj.x_ratio.end());
  o.require(*lo < x_eq && *hi > x_eq, std::string(name) + " x stays on one side of equilibrium");
  o.require(std::abs(traj.x_ratio.back() - x_eq) < 0.05, std::string(name) + " x does not settle");
  o.require(target < x_eq ? *lo <= target : *hi >= target, std::string(name) + " x misses the target");
}

Outcome criterion_1() {
  Outcome o;
  const auto s = fixtures::reference_scenario();
  check_contact(o, "hot", 5.2, s.hot, 2.5, s);
  check_contact(o, "cold", 2.5, s.cold, 2.6, s);
  const auto r = run_otto_cycle(s);
  o.require(*r.tau1 <= 200.0 / 5.2 && *r.tau2 <= 200.0 / 2.5, "crossing beyond 200/omega");
  // the same crossings at half the step size
  auto fine = s;
  fine.integrator.dt /= 2.0;
  const auto rf = run_otto_cycle(fine);
  const double d1 = std::abs(*rf.tau1 - *r.tau1), d2 = std::abs(*rf.tau2 - *r.tau2);
  o.require(d1 <= 1e-6 && d2 <= 1e-6, "crossing times move by more than 1e-6 under dt/2");
  o.detail << "tau1 = " << format_number(*r.tau1) << ", tau2 = " << format_number(*r.tau2)
           << ", dt/2 shifts " << d1 << ", " << d2;
  return o;
}

Outcome criterion_2() {
  Outcome o;
  const auto s = fixtures::reference_scenario();
  const auto r = run_otto_cycle(s);
  const auto c = carnot_cycle(s);
  o.require(std::abs(r.eta - (1.0 - 2.5 / 5.2)) <= 1e-9, "eta");
  o.require(std::abs(r.w - 2.7 * (fixtures::kP25 - fixtures::kP26)) <= 1e-6, "W");
  o.require(std::abs(r.q_h - fixtures::kQh) <= 1e-6, "Q_h");
  o.require(std::abs(r.w_tilde - r.delta_s_v) <= 1e-9, "w_tilde vs dS_v");
  o.require(std::abs(r.w_tilde - fixtures::kDeltaSv) <= 1e-9, "w_tilde");
  o.require(std::abs(r.eta_tilde - 0.5) <= 1e-12, "eta_tilde");
  o.require(r.eta > c.eta_c, "eta not above Carnot");
  o.require(std::abs(r.eta_tilde - c.eta_c) <= 1e-12, "eta_tilde differs from Carnot");
  o.detail << "eta = " << format_number(r.eta) << ", W = " << format_number(r.w)
           << ", Q_h = " << format_number(r.q_h) << ", w_tilde = " << format_number(r.w_tilde)
           << ", eta_tilde = " << format_number(r.eta_tilde);
  return o;
}

Outcome criterion_3() {
  Outcome o;
  std::vector<CycleReport> reports;
  reports.push_back(run_otto_cycle(fixtures::reference_scenario()));
  std::mt19937_64 rng(303);
  for (int k = 0; k < 20; ++k) reports.push_back(run_otto_cycle(random_scenario(rng, k % 4 == 0)));
  auto infeasible = fixtures::reference_scenario();
  infeasible.hot.temperature = 3.0;
  reports.push_back(run_otto_cycle(infeasible));
  auto degenerate = fixtures::reference_scenario();
  degenerate.hot.temperature = 5.2 / 2.5;
  reports.push_back(run_otto_cycle(degenerate));
  double worst = 0.0;
  for (const auto& r : reports) {
    worst = std::max(worst, std::abs(r.w - (r.q_h + r.q_c)));
    worst = std::max(worst, std::abs(r.w_tilde - (r.q_h_tilde + r.q_c_tilde)));
  }
  o.require(worst <= 1e-12, "first-law residual");
  o.detail << reports.size() << " reports, worst residual " << worst;
  return o;
}

Outcome criterion_4() {
  Outcome o;
  std::mt19937_64 rng(404);
  double worst = 0.0, worst_form = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto s = random_scenario(rng, false);
    const auto r = run_otto_cycle(s);
    const auto c = carnot_cycle(s);
    worst = std::max({worst, std::abs(c.q_h_c - r.q_h_tilde), std::abs(c.q_c_c - r.q_c_tilde),
                      std::abs(c.w_c - r.w_tilde)});
    worst_form = std::max({worst_form, std::abs(c.q_h_c_log_odds - c.q_h_c),
                           std::abs(c.q_c_c_log_odds - c.q_c_c)});
  }
  o.require(worst <= 1e-12, "Carnot vs corrected Otto");
  o.require(worst_form <= 1e-12, "log-odds form vs entropy form");
  o.detail << "50 scenarios, worst " << worst << ", log-odds form " << worst_form;
  return o;
}

Outcome criterion_5() {
  Outcome o;
  std::mt19937_64 rng(505);
  double min_w = INFINITY, worst_tilde = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto r = run_otto_cycle(random_scenario(rng, true));
    min_w = std::min(min_w, r.w);
    worst_tilde = std::max(worst_tilde, std::abs(r.w_tilde));
  }
  o.require(min_w > 0.0, "raw W not positive");
  o.require(worst_tilde <= 1e-12, "w_tilde not zero");

  std::uniform_real_distribution<double> u(0.0, 1.0);
  double max_markov_w = -INFINITY;
  int no_crossing = 0;
  for (int k = 0; k < 10; ++k) {
    const double t = 1.0 + u(rng), wh = 4.5 + 1.5 * u(rng), wc = wh * (0.4 + 0.5 * u(rng));
    auto s = OttoScenario::with_defaults(
        wh, wc, BathSpec{t, {0.1, 4.0 * wh}, DynamicsModel::lindblad_reference},
        BathSpec{t, {0.1, 4.0 * wc}, DynamicsModel::lindblad_reference});
    const auto f = run_fixed_duration_cycle(s, 0.05 + 2.0 * u(rng), 0.05 + 2.0 * u(rng));
    max_markov_w = std::max(max_markov_w, f.w);
    s.integrator.t_max = 5.0;
    try {
      const auto r = run_otto_cycle(s);
      max_markov_w = std::max(max_markov_w, r.w);
    } catch (const NoCrossing&) {
      ++no_crossing;
    }
  }
  o.require(max_markov_w <= 1e-15, "Markovian cycle with W > 0");
  o.detail << "TCL2 min W = " << min_w << ", max |w_tilde| = " << worst_tilde
           << "; Markovian max W = " << max_markov_w << ", " << no_crossing
           << "/10 crossing cycles impossible";
  return o;
}

Outcome criterion_6() {
  Outcome o;
  const BathSpec bath = fixtures::hot_bath(DynamicsModel::lindblad_reference);
  auto cfg = IntegratorConfig::defaults(5.2, bath);
  cfg.t_max = 10.0;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 0.5), v(0.01, 0.99);
  double worst_rise = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto traj = evolve_markovian(TwoLevelState{5.2, u(rng), {}}, bath, 5.2, cfg);
    for (std::size_t i = 1; i < traj.size(); ++i)
      worst_rise = std::max(worst_rise, traj.rel_entropy_to_eq[i] - traj.rel_entropy_to_eq[i - 1]);
  }
  o.require(worst_rise <= 1e-12, "relative entropy to equilibrium increased");
  double worst_growth = 0.0;
  for (int k = 0; k < 50; ++k) {
    const TwoLevelState p{5.2, v(rng), {}}, q{5.2, v(rng), {}};
    const auto tp = evolve_markovian(p, bath, 5.2, cfg);
    const auto tq = evolve_markovian(q, bath, 5.2, cfg);
    const double d0 = relative_entropy(p, q);
    for (std::size_t i = 0; i < tp.size(); ++i)
      worst_growth = std::max(worst_growth, relative_entropy(tp.state(i), tq.state(i)) - d0);
  }
  o.require(worst_growth <= 1e-12, "pair relative entropy grew");
  bool overshoot_refused = false;
  try {
    auto ev = make_evolver(thermal_state(5.2, 2.0), bath, 5.2, cfg);
    find_crossing_time(*ev, 2.5, CrossingConfig{});
  } catch (const NoCrossing&) {
    overshoot_refused = true;
  }
  o.require(overshoot_refused, "Markovian contact crossed past equilibrium");
  o.detail << "max D rise " << worst_rise << ", max pair growth " << worst_growth;
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const auto bath = fixtures::hot_bath();
  const auto cfg = IntegratorConfig::defaults(5.2, bath);
  const auto start = thermal_state(5.2, 2.0);
  const auto s = evolve_nonmarkovian(start, bath, 5.2, cfg);
  const auto r = evolve_oracle(start, bath, 5.2, cfg);
  double dev = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) dev = std::max(dev, std::abs(s.sigma_z[i] - r.sigma_z[i]));
  o.require(s.size() == r.size() && dev <= 1e-6, "stepper vs oracle");

  const double dt0 = 2.0 * std::numbers::pi / (40.0 * 5.2);
  double finals[3];
  for (int k = 0; k < 3; ++k) {
    IntegratorConfig c;
    c.dt = dt0 / std::ldexp(1.0, k);
    c.t_max = 64.0 * dt0;
    c.quad = {1e-14, 1e-13, 20000};
    finals[k] = evolve_nonmarkovian(TwoLevelState{5.2, 0.3, {}}, bath, 5.2, c).sigma_z.back();
  }
  const double order = std::log2(std::abs(finals[0] - finals[1]) / std::abs(finals[1] - finals[2]));
  o.require(order >= 3.5 && order <= 4.5, "step-halving order");

  const double tail = std::abs(s.sigma_z.back() + std::tanh(1.3));
  o.require(tail <= 1e-3, "asymptotic sigma_z");
  const double a_late = tcl2_coefficients(50.0 / 5.2, 5.2, bath).decay_a;
  const double a_inf = lindblad_rates(5.2, bath).decay_a;
  o.require(std::abs(a_inf - fixtures::kDecayInf) <= 0.01 * fixtures::kDecayInf, "decay_a(inf)");
  o.require(std::abs(a_late - fixtures::kDecayInf) <= 0.01 * fixtures::kDecayInf, "decay_a(50/omega)");
  o.detail << "oracle dev " << dev << " over " << s.size() << " samples, order " << order
           << ", |sigma_z(t_max) + tanh(1.3)| = " << tail << ", decay_a = " << format_number(a_late);
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const auto s = fixtures::reference_scenario();
  auto cfg = s.integrator;
  cfg.t_max = 20.0;
  const auto markov = evolve_markovian(thermal_state(5.2, 2.0),
                                       fixtures::hot_bath(DynamicsModel::lindblad_reference), 5.2, cfg);
  const double zero = nm_lower_bound(markov, 2.0);
  o.require(zero <= 1e-15, "Markovian bound not zero");

  auto ev = make_evolver(thermal_state(5.2, 2.0), s.hot, 5.2, s.integrator);
  Trajectory rec;
  rec.omega = 5.2;
  rec.reference_temperature = 2.0;
  find_crossing_time(*ev, 2.5, s.crossing, &rec);
  const double bound = nm_lower_bound(rec, 2.0);
  const double cost_h = run_otto_cycle(s).cost_h;
  o.require(bound >= cost_h * (1.0 - 1e-12), "TCL2 bound below cost_h");
  o.detail << "Markovian " << zero << ", TCL2 " << format_number(bound) << " vs cost_h "
           << format_number(cost_h);
  return o;
}

// --- CLI ---------------------------------------------------------------

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + QOTTO_CLI + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb || na.empty()) return false;
  for (const auto& n : na)
    if (slurp(a / n) != slurp(b / n)) return false;
  return true;
}

Outcome criterion_9() {
  Outcome o;
  const fs::path tmp = fs::temp_directory_path() / "qotto_acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::string fig5 = "\"" + kConfigs + "fig5.toml\"";

  const int c1 = run_cli("cycle --config " + fig5 + " --out \"" + (tmp / "a.json").string() + "\"");
  const int c2 = run_cli("cycle --config " + fig5 + " --out \"" + (tmp / "b.json").string() + "\"");
  o.require(c1 == 0 && c2 == 0, "cycle runs");
  o.require(slurp(tmp / "a.json") == slurp(tmp / "b.json") && !slurp(tmp / "a.json").empty(),
            "repeated cycle output differs");

  const std::string axes = "\"" + kConfigs + "gamma_axes.toml\"";
  const int s1 = run_cli("sweep --config " + fig5 + " --axes " + axes + " --jobs 1 --out \"" +
                         (tmp / "j1").string() + "\"");
  const int s8 = run_cli("sweep --config " + fig5 + " --axes " + axes + " --jobs 8 --out \"" +
                         (tmp / "j8").string() + "\"");
  o.require(s1 == 0 && s8 == 0, "sweep runs");
  o.require(same_tree(tmp / "j1", tmp / "j8"), "jobs 1 and jobs 8 sweeps differ");

  std::ofstream(tmp / "malformed.toml") << "[system\nomega_h = 5.2\n";
  std::string infeasible = slurp(kConfigs + "fig5.toml");
  infeasible.replace(infeasible.find("temperature = 2.0"), 17, "temperature = 3.0");
  std::ofstream(tmp / "infeasible.toml") << infeasible;
  const int e2 = run_cli("cycle --config \"" + (tmp / "malformed.toml").string() + "\" --out /dev/null");
  const int e3 = run_cli("cycle --config \"" + (tmp / "infeasible.toml").string() + "\" --out /dev/null");
  const int e4 = run_cli("cycle --config " + fig5 + " --out /dev/null", "QOTTO_QUAD_TOL=1e-30");
  o.require(e2 == 2, "malformed config exit code");
  o.require(e3 == 3, "infeasible scenario exit code");
  o.require(e4 == 4, "quadrature failure exit code");
  o.detail << "exit codes " << e2 << "/" << e3 << "/" << e4 << ", sweeps identical";
  fs::remove_all(tmp);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"reference contacts overshoot and cross", criterion_1},
      {"reference cycle numbers", criterion_2},
      {"first law in every report", criterion_3},
      {"corrected Otto equals Carnot", criterion_4},
      {"equal-temperature second law", criterion_5},
      {"Markovian properties", criterion_6},
      {"TCL2 numerics", criterion_7},
      {"non-Markovianity bound", criterion_8},
      {"CLI determinism and exit codes", criterion_9},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
