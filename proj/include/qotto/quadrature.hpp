#pragma once

// Adaptive panel quadrature with an embedded Gauss-Kronrod 7/15 rule.
// Integrands are vector valued so several related integrals can share one
// set of (expensive) node evaluations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace qotto {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  // Panel bisections allowed beyond the initial layout.
  int max_subdivisions = 20000;
};

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  double error = 0.0;  // sum over panels of max_i |K15 - G7|
  int panels = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; odd indices
// are the Gauss 7-point nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double lo, hi;
  std::array<double, N> value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Integrand values at the 15 Kronrod nodes of a panel: index 0 is the
// centre, 2j+1 and 2j+2 are c - h*kXgk[j] and c + h*kXgk[j].
template <std::size_t N>
using NodeValues = std::array<std::array<double, N>, 15>;

template <std::size_t N>
Panel<N> gk15_combine(double lo, double hi, const NodeValues<N>& v) {
  const double h = 0.5 * (hi - lo);
  std::array<double, N> k{}, g{};
  for (std::size_t i = 0; i < N; ++i) {
    k[i] = kWgk[7] * v[0][i];
    g[i] = kWg[3] * v[0][i];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    for (std::size_t i = 0; i < N; ++i) {
      const double s = v[2 * j + 1][i] + v[2 * j + 2][i];
      k[i] += kWgk[j] * s;
      if (j % 2 == 1) g[i] += kWg[j / 2] * s;
    }
  }
  Panel<N> p{lo, hi, {}, 0.0};
  for (std::size_t i = 0; i < N; ++i) {
    p.value[i] = h * k[i];
    p.error = std::max(p.error, std::abs(h * (k[i] - g[i])));
  }
  return p;
}

template <std::size_t N, class F>
Panel<N> gk15(const F& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  NodeValues<N> v;
  v[0] = f(c);
  for (std::size_t j = 0; j < 7; ++j) {
    v[2 * j + 1] = f(c - h * kXgk[j]);
    v[2 * j + 2] = f(c + h * kXgk[j]);
  }
  return gk15_combine<N>(lo, hi, v);
}

}  // namespace detail

// Adaptive driver over a fixed initial layout of n0 equal panels on
// [lo, hi]. initial(i, a, b) evaluates initial panel i; refine(a, b) any
// panel produced by bisection. The panel with the largest error estimate is
// bisected until
//   error <= max(abs_tol, rel_tol * max_i |value_i|)
// or the subdivision budget is exhausted (converged = false).
template <std::size_t N, class Initial, class Refine>
QuadratureResult<N> integrate_layout(const Initial& initial, std::size_t n0, double lo, double hi,
                                     const Refine& refine, const QuadratureOptions& opts) {
  QuadratureResult<N> out;
  if (!(hi > lo)) {
    out.converged = true;
    return out;
  }
  const double w = (hi - lo) / static_cast<double>(n0);

  std::vector<detail::Panel<N>> panels;
  panels.reserve(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    const double a = lo + w * static_cast<double>(i);
    const double b = (i + 1 == n0) ? hi : lo + w * static_cast<double>(i + 1);
    panels.push_back(initial(i, a, b));
  }

  // Sums run in interval order so results never depend on refinement history.
  auto finish = [&](bool converged) {
    std::sort(panels.begin(), panels.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
    out.value.fill(0.0);
    out.error = 0.0;
    for (const auto& p : panels) {
      for (std::size_t i = 0; i < N; ++i) out.value[i] += p.value[i];
      out.error += p.error;
    }
    out.panels = static_cast<int>(panels.size());
    out.converged = converged;
    return out;
  };
  auto target = [&](const std::array<double, N>& value) {
    double scale = 0.0;
    for (double v : value) scale = std::max(scale, std::abs(v));
    return std::max(opts.abs_tol, opts.rel_tol * scale);
  };

  std::array<double, N> value{};
  double error = 0.0;
  for (const auto& p : panels) {
    for (std::size_t i = 0; i < N; ++i) value[i] += p.value[i];
    error += p.error;
  }
  if (error <= target(value)) return finish(true);

  std::make_heap(panels.begin(), panels.end());
  for (int it = 0; it < opts.max_subdivisions; ++it) {
    std::pop_heap(panels.begin(), panels.end());
    const detail::Panel<N> worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    panels.push_back(refine(worst.lo, mid));
    std::push_heap(panels.begin(), panels.end());
    panels.push_back(refine(mid, worst.hi));
    std::push_heap(panels.begin(), panels.end());
    // full re-sum; a running error total loses accuracy through cancellation
    value.fill(0.0);
    error = 0.0;
    for (const auto& p : panels) {
      for (std::size_t i = 0; i < N; ++i) value[i] += p.value[i];
      error += p.error;
    }
    if (error <= target(value)) return finish(true);
  }
  return finish(false);
}

// Integrates f over [lo, hi], starting from equal panels no wider than
// max_panel_width.
template <std::size_t N, class F>
QuadratureResult<N> integrate(const F& f, double lo, double hi, double max_panel_width,
                              const QuadratureOptions& opts) {
  const auto n0 = static_cast<std::size_t>(
      std::max(1.0, std::ceil((hi - lo) / max_panel_width - 1e-9)));
  auto panel = [&](double a, double b) { return detail::gk15<N>(f, a, b); };
  return integrate_layout<N>([&](std::size_t, double a, double b) { return panel(a, b); }, n0,
                             lo, hi, panel, opts);
}

}  // namespace qotto
