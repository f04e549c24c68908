#pragma once

#include <cmath>
#include <complex>

#include "weakbeam/errors.hpp"

namespace weakbeam {

inline constexpr double kOrthogonalityTol = 1e-12;

// Photon polarization in the circular basis {|+>, |->}, which maps one-to-one
// onto the two upper levels of the V system for emission along the field axis.
struct PolarizationState {
  std::complex<double> c_plus;
  std::complex<double> c_minus;

  double norm_sq() const { return std::norm(c_plus) + std::norm(c_minus); }

  static PolarizationState normalized(std::complex<double> plus, std::complex<double> minus) {
    const double n = std::sqrt(std::norm(plus) + std::norm(minus));
    if (n <= 0.0) throw ValidationError("polarization state must be non-zero");
    return {plus / n, minus / n};
  }
};

// Superposition prepared by a linearly polarized excitation pulse.
inline PolarizationState preparation_state() {
  const double r = 1.0 / std::sqrt(2.0);
  return {{r, 0.0}, {r, 0.0}};
}

// Linear polarization rotated by epsilon from the port orthogonal to the
// preparation; epsilon = pi/2 recovers the preparation up to a global phase.
inline PolarizationState postselect_angle(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= M_PI / 2.0)) {
    throw ValidationError("postselection angle must lie in [0, pi/2]");
  }
  const double r = 1.0 / std::sqrt(2.0);
  return {std::polar(r, -epsilon), -std::polar(r, epsilon)};
}

struct WeakValue {
  double re = 0.0;
  double im = 0.0;
};

// Weak value of sigma_z = |+><+| - |-><-| for the given pre/postselection.
// Sign convention follows the emission amplitude <pre|sigma_z|post>/<pre|post>,
// so that postselect_angle(eps) yields Im = +cot(eps) and the arrival-time
// shift 2*Delta*Im/Gamma^2 comes out positive (slower-than-natural decay).
inline WeakValue weak_value(const PolarizationState& pre, const PolarizationState& post) {
  const std::complex<double> overlap =
      std::conj(pre.c_plus) * post.c_plus + std::conj(pre.c_minus) * post.c_minus;
  if (std::abs(overlap) <= kOrthogonalityTol) {
    throw ValidationError("weak value undefined: pre- and postselection are orthogonal");
  }
  const std::complex<double> numer =
      std::conj(pre.c_plus) * post.c_plus - std::conj(pre.c_minus) * post.c_minus;
  const std::complex<double> w = numer / overlap;
  return {w.real(), w.imag()};
}

}  // namespace weakbeam
