#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace weakbeam {

// Adaptive Simpson integration. Integrands in this project are smooth
// (damped oscillations at worst), so plain bisection refinement converges
// quickly; depth is capped to keep pathological inputs from recursing forever.
namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt(const F& f, double a, double b, double fa, double fm, double fb, double whole,
             double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_step(f, a, m, fa, flm, fm);
  const double right = simpson_step(f, m, b, fm, frm, fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
    return left + right + err / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12, int max_depth = 48) {
  if (a == b) return 0.0;
  // Seed the recursion with a few panels so that oscillatory integrands are
  // not mistaken for zero on the first coarse step.
  const int panels = 16;
  const double h = (b - a) / panels;
  double total = 0.0;
  double fa = f(a);
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    const double fm = f(0.5 * (x0 + x1));
    const double fb = f(x1);
    const double whole = detail::simpson_step(f, x0, x1, fa, fm, fb);
    total += detail::adapt(f, x0, x1, fa, fm, fb, whole, abs_tol / panels, max_depth);
    fa = fb;
  }
  return total;
}

}  // namespace weakbeam
