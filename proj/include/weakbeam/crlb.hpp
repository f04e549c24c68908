#pragma once

#include <cmath>
#include <limits>

#include "weakbeam/params.hpp"
#include "weakbeam/pointer_model.hpp"
#include "weakbeam/quadrature.hpp"

namespace weakbeam {

// Per-photon Fisher information for the Zeeman splitting delta, computed by
// quadrature on the normalized arrival-time distribution:
//   I1 = Var[ d/d(delta) ln P ] = Var[ 2 t cot(delta t + epsilon) ].
// The expectation form keeps integrands finite at the sin^2 zeros.
inline double fisher_information_delta(const VSystemParams& params) {
  params.validate();
  params.require_non_degenerate();
  if (!(params.epsilon > 0.0)) {
    throw ValidationError("fisher_information_delta requires epsilon > 0");
  }
  const double g = params.gamma, d = params.delta, e = params.epsilon;
  const double norm = closed_form_norm(params);
  const double hi = 60.0 / g;
  // E[score] where score = 2 t cot(d t + e); integrand t e^{-gt} sin(2(dt+e)).
  const double mean_score = norm * integrate(
      [&](double t) { return t * std::exp(-g * t) * std::sin(2.0 * (d * t + e)); }, 0.0, hi,
      1e-14 * std::max(1.0, 1.0 / (g * g)));
  // E[score^2]; integrand 4 t^2 e^{-gt} cos^2(dt+e).
  const double mean_score_sq = norm * integrate(
      [&](double t) {
        const double c = std::cos(d * t + e);
        return 4.0 * t * t * std::exp(-g * t) * c * c;
      },
      0.0, hi, 1e-14 * std::max(1.0, 1.0 / (g * g * g)));
  const double info = mean_score_sq - mean_score * mean_score;
  return info > 0.0 ? info : 0.0;
}

// Cramer-Rao bound on the splitting estimate, reported as a cyclic-frequency
// spectral sensitivity in Hz / sqrt(Hz). Insensitive configurations (zero
// Fisher information) return +infinity.
inline double crlb_sensitivity(const VSystemParams& params, double count_rate) {
  if (!(count_rate > 0.0)) throw ValidationError("count_rate must be > 0");
  const double info = fisher_information_delta(params);
  if (info <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * M_PI * std::sqrt(info * count_rate));
}

}  // namespace weakbeam
