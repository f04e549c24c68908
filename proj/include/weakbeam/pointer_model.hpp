#pragma once

#include <cmath>
#include <complex>

#include "weakbeam/errors.hpp"
#include "weakbeam/params.hpp"
#include "weakbeam/states.hpp"

namespace weakbeam {

// Closed forms below all derive from
//   int_0^x exp(-G t) {1, t} cos(2 D t + 2 p) dt = Re[ e^{2ip} (...) / z^k ]
// with z = G - 2iD. Each is unit-tested against adaptive quadrature.
namespace detail {

inline std::complex<double> zpole(double gamma, double delta) {
  return {gamma, -2.0 * delta};
}

inline std::complex<double> phase2(double phase) {
  return std::polar(1.0, 2.0 * phase);
}

}  // namespace detail

// Unnormalized emission shape exp(-gamma t) sin^2(delta t + phase), t >= 0.
// `phase` is unrestricted so both postselection ports can be evaluated
// (the orthogonal port is phase + pi/2).
inline double emission_shape(double t, double gamma, double delta, double phase) {
  if (t < 0.0) return 0.0;
  const double s = std::sin(delta * t + phase);
  return std::exp(-gamma * t) * s * s;
}

// int_0^inf emission_shape dt.
inline double shape_integral(double gamma, double delta, double phase) {
  const auto z = detail::zpole(gamma, delta);
  return 0.5 * (1.0 / gamma - (detail::phase2(phase) / z).real());
}

// int_0^x emission_shape dt.
inline double shape_partial_integral(double x, double gamma, double delta, double phase) {
  if (x <= 0.0) return 0.0;
  const auto z = detail::zpole(gamma, delta);
  const std::complex<double> ez = std::exp(-z * x);
  return 0.5 * ((1.0 - std::exp(-gamma * x)) / gamma -
                (detail::phase2(phase) * (1.0 - ez) / z).real());
}

// int_0^x t * emission_shape dt.
inline double shape_partial_first_moment(double x, double gamma, double delta, double phase) {
  if (x <= 0.0) return 0.0;
  const auto z = detail::zpole(gamma, delta);
  const std::complex<double> ez = std::exp(-z * x);
  const double g = gamma;
  return 0.5 * ((1.0 - std::exp(-g * x) * (1.0 + g * x)) / (g * g) -
                (detail::phase2(phase) * (1.0 - ez * (1.0 + z * x)) / (z * z)).real());
}

// int_0^inf {t, t^2} * emission_shape dt.
inline double shape_first_moment(double gamma, double delta, double phase) {
  const auto z = detail::zpole(gamma, delta);
  return 0.5 * (1.0 / (gamma * gamma) - (detail::phase2(phase) / (z * z)).real());
}

inline double shape_second_moment(double gamma, double delta, double phase) {
  const auto z = detail::zpole(gamma, delta);
  return 1.0 / (gamma * gamma * gamma) - (detail::phase2(phase) / (z * z * z)).real();
}

// Normalization constant C of the postselected arrival-time distribution
// P(t) = C exp(-gamma t) sin^2(delta t + epsilon).
inline double closed_form_norm(const VSystemParams& params) {
  params.validate();
  params.require_non_degenerate();
  return 1.0 / shape_integral(params.gamma, params.delta, params.epsilon);
}

// Normalized postselected density for a delta-impulse excitation.
// Pulse convolution is handled by convolved_pdf.
inline double pointer_pdf(double t, const VSystemParams& params) {
  params.validate();
  params.require_non_degenerate();
  if (params.pulse.kind != PulseKind::DeltaImpulse) {
    throw ValidationError("pointer_pdf takes a delta-impulse pulse; use convolved_pdf");
  }
  if (!std::isfinite(t)) throw ValidationError("pointer_pdf: t must be finite");
  return closed_form_norm(params) * emission_shape(t, params.gamma, params.delta, params.epsilon);
}

// CDF of the delta-impulse distribution.
inline double arrival_cdf(double t, const VSystemParams& params) {
  params.require_non_degenerate();
  return shape_partial_integral(t, params.gamma, params.delta, params.epsilon) /
         shape_integral(params.gamma, params.delta, params.epsilon);
}

// Exact first moment of the normalized distribution (no pulse offset).
inline double mean_arrival_time(const VSystemParams& params) {
  params.validate();
  params.require_non_degenerate();
  return shape_first_moment(params.gamma, params.delta, params.epsilon) /
         shape_integral(params.gamma, params.delta, params.epsilon);
}

inline double arrival_time_variance(const VSystemParams& params) {
  params.require_non_degenerate();
  const double m0 = shape_integral(params.gamma, params.delta, params.epsilon);
  const double m1 = shape_first_moment(params.gamma, params.delta, params.epsilon) / m0;
  const double m2 = shape_second_moment(params.gamma, params.delta, params.epsilon) / m0;
  return m2 - m1 * m1;
}

// Mean of the distribution truncated to [0, window]; quantifies the bias of
// a finite moment window.
inline double truncated_mean_arrival_time(const VSystemParams& params, double window) {
  params.require_non_degenerate();
  if (!(window > 0.0)) throw ValidationError("window must be > 0");
  const double m0 = shape_partial_integral(window, params.gamma, params.delta, params.epsilon);
  if (m0 <= 0.0) throw ValidationError("window contains no probability mass");
  return shape_partial_first_moment(window, params.gamma, params.delta, params.epsilon) / m0;
}

// First-order effective decay rate (1 - 2 delta / (epsilon gamma)) * gamma,
// valid in the amplification regime delta/gamma << epsilon << 1.
struct ApproxDecayRate {
  double rate = 0.0;       // 1/s; may be <= 0 far outside the weak regime
  bool in_weak_regime = false;
};

inline ApproxDecayRate approx_decay_rate(const VSystemParams& params) {
  params.validate();
  if (!(params.epsilon > 0.0)) throw ValidationError("approx_decay_rate requires epsilon > 0");
  const double rate =
      (1.0 - 2.0 * params.delta / (params.epsilon * params.gamma)) * params.gamma;
  return {rate, params.weak_regime()};
}

// First-order shift of the mean arrival time, 2 delta cot(epsilon) / gamma^2.
// Equals 2 * delta * Var[natural decay] * Im[weak value] by construction.
inline double mean_shift(const VSystemParams& params) {
  params.validate();
  if (!(params.epsilon > 0.0)) throw ValidationError("mean_shift requires epsilon > 0");
  const double cot = std::cos(params.epsilon) / std::sin(params.epsilon);
  return 2.0 * params.delta * cot / (params.gamma * params.gamma);
}

// Pulse-convolved postselected density. The square-pulse case is the exact
// piecewise closed form (difference of partial integrals), not a numerical
// convolution, so it is cheap inside fit loops.
inline double convolved_pdf(double t, const VSystemParams& params) {
  params.validate();
  params.require_non_degenerate();
  if (params.pulse.kind == PulseKind::DeltaImpulse) {
    return closed_form_norm(params) *
           emission_shape(t, params.gamma, params.delta, params.epsilon);
  }
  const double tau = params.pulse.duration;
  if (t <= 0.0) return 0.0;
  const double hi = shape_partial_integral(t, params.gamma, params.delta, params.epsilon);
  const double lo =
      shape_partial_integral(t - tau, params.gamma, params.delta, params.epsilon);
  return (hi - lo) / (tau * shape_integral(params.gamma, params.delta, params.epsilon));
}

// CDF of the pulse-convolved distribution.
inline double convolved_cdf(double t, const VSystemParams& params) {
  params.require_non_degenerate();
  if (t <= 0.0) return 0.0;
  if (params.pulse.kind == PulseKind::DeltaImpulse) return arrival_cdf(t, params);
  const double tau = params.pulse.duration;
  const double g = params.gamma, d = params.delta, e = params.epsilon;
  // int_0^x of the partial integral, from the same identities.
  const auto ipartial = [&](double x) -> double {
    if (x <= 0.0) return 0.0;
    const auto z = detail::zpole(g, d);
    const std::complex<double> ez = std::exp(-z * x);
    return 0.5 * ((x + (std::exp(-g * x) - 1.0) / g) / g -
                  (detail::phase2(e) * (x + (ez - 1.0) / z) / z).real());
  };
  return (ipartial(t) - ipartial(t - tau)) / (tau * shape_integral(g, d, e));
}

// Pulse-convolved natural-decay density (the incoherent background model).
inline double convolved_exponential_pdf(double t, double gamma, const PulseShape& pulse) {
  if (t <= 0.0) return 0.0;
  if (pulse.kind == PulseKind::DeltaImpulse) return gamma * std::exp(-gamma * t);
  const double tau = pulse.duration;
  const double hi = 1.0 - std::exp(-gamma * t);
  const double lo = t > tau ? 1.0 - std::exp(-gamma * (t - tau)) : 0.0;
  return (hi - lo) / tau;
}

inline double convolved_exponential_cdf(double t, double gamma, const PulseShape& pulse) {
  if (t <= 0.0) return 0.0;
  if (pulse.kind == PulseKind::DeltaImpulse) return 1.0 - std::exp(-gamma * t);
  const double tau = pulse.duration;
  const double m = t > tau ? t - tau : 0.0;
  return ((t - m) + (std::exp(-gamma * t) - std::exp(-gamma * m)) / gamma) / tau;
}

// Probability that an emitted photon passes postselection: the average of
// sin^2(delta t + epsilon) over the natural decay.
inline double postselection_acceptance(const VSystemParams& params) {
  return params.gamma * shape_integral(params.gamma, params.delta, params.epsilon);
}

}  // namespace weakbeam
