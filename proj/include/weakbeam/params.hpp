#pragma once

#include <cmath>
#include <string>

#include "weakbeam/errors.hpp"

namespace weakbeam {

enum class PulseKind { DeltaImpulse, Square };

// Excitation pulse shape used for convolving the emission model.
struct PulseShape {
  PulseKind kind = PulseKind::DeltaImpulse;
  double duration = 0.0;  // seconds; 0 for a delta impulse

  static PulseShape delta_impulse() { return {PulseKind::DeltaImpulse, 0.0}; }
  static PulseShape square(double duration_s) { return {PulseKind::Square, duration_s}; }

  void validate() const {
    if (duration < 0.0) throw ValidationError("pulse duration must be >= 0");
    if (kind == PulseKind::Square && duration <= 0.0) {
      throw ValidationError("square pulse requires duration > 0");
    }
    if (kind == PulseKind::DeltaImpulse && duration != 0.0) {
      throw ValidationError("delta-impulse pulse must have duration 0");
    }
  }

  // Mean emission-time offset added by the pulse.
  double mean_offset() const { return kind == PulseKind::Square ? 0.5 * duration : 0.0; }
};

// Physical configuration of the analytic model.
//
// gamma is the decay rate in 1/s (reciprocal excited-state lifetime).
// delta is the *angular* Zeeman splitting in rad/s: the level shifts are
// +-hbar*delta. File/CLI configuration takes cyclic frequencies (Hz) and
// multiplies by 2*pi on load; everything past that boundary is angular.
struct VSystemParams {
  double gamma = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  PulseShape pulse = PulseShape::delta_impulse();

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be >= 0");
    if (!(epsilon >= 0.0 && epsilon <= M_PI / 2.0)) {
      throw ValidationError("epsilon must lie in [0, pi/2]");
    }
    pulse.validate();
  }

  // True in the amplification regime delta/gamma << epsilon << 1.
  // Diagnostic only; every operation works outside it.
  bool weak_regime() const {
    return delta / gamma < epsilon / 10.0 && epsilon < 0.1 * (M_PI / 2.0);
  }

  bool degenerate() const { return delta == 0.0 && epsilon == 0.0; }

  void require_non_degenerate() const {
    if (degenerate()) {
      throw ValidationError(
          "degenerate distribution: delta = 0 and epsilon = 0 pass no photons");
    }
  }
};

}  // namespace weakbeam
