#pragma once

#include <cmath>
#include <random>

#include "weakbeam/params.hpp"
#include "weakbeam/pointer_model.hpp"
#include "weakbeam/rng.hpp"

namespace weakbeam {

namespace detail {

inline double sample_exponential(double gamma, std::mt19937_64& rng) {
  // Inverted uniform keeps the argument of log strictly positive.
  return -std::log(1.0 - uniform01(rng)) / gamma;
}

inline double sample_pulse_offset(const PulseShape& pulse, std::mt19937_64& rng) {
  if (pulse.kind == PulseKind::DeltaImpulse) return 0.0;
  return pulse.duration * uniform01(rng);
}

}  // namespace detail

// One draw from the pulse-convolved postselected arrival distribution.
// Rejection sampling: propose emission time t' ~ Exponential(gamma) plus a
// uniform pulse offset, accept with probability sin^2(delta t' + epsilon)
// evaluated at the pre-convolution emission time. The acceptance probability
// has positive mean for non-degenerate parameters, so the loop terminates
// with probability 1.
inline double sample_arrival(const VSystemParams& params, std::mt19937_64& rng) {
  params.require_non_degenerate();
  for (;;) {
    const double emission = detail::sample_exponential(params.gamma, rng);
    const double s = std::sin(params.delta * emission + params.epsilon);
    if (uniform01(rng) < s * s) {
      return detail::sample_pulse_offset(params.pulse, rng) + emission;
    }
  }
}

// One draw from the pulse-convolved natural decay (incoherent background).
inline double sample_background(double gamma, const PulseShape& pulse, std::mt19937_64& rng) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  return detail::sample_pulse_offset(pulse, rng) + detail::sample_exponential(gamma, rng);
}

}  // namespace weakbeam
