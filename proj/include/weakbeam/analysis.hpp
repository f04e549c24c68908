#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "weakbeam/errors.hpp"
#include "weakbeam/events.hpp"
#include "weakbeam/histogram.hpp"
#include "weakbeam/pointer_model.hpp"

namespace weakbeam {

struct ValueWithError {
  double value = 0.0;
  double se = 0.0;
};

// Remove every event closer than `cutoff` to the previously *retained* event
// on the absolute timeline. With cutoff at the hardware dead time plus one
// afterpulse delay this strips both orders of afterpulsing; the survivor
// stream then has a hard effective dead time equal to the cutoff, which the
// dead-time correction assumes.
inline EventStream filter_afterpulses(const EventStream& input, double cutoff) {
  if (!(cutoff > 0.0)) throw ValidationError("afterpulse cutoff must be > 0");
  const std::uint64_t cutoff_ps = static_cast<std::uint64_t>(std::llround(cutoff * 1e12));
  const std::uint64_t cutoff_ticks =
      (cutoff_ps + input.bin_width_ps - 1) / input.bin_width_ps;

  EventStream out;
  out.bin_width_ps = input.bin_width_ps;
  out.rep_period_ps = input.rep_period_ps;
  out.n_shots = input.n_shots;
  out.events.reserve(input.events.size());

  std::uint64_t prev_abs = 0, last_retained = 0;
  bool have_prev = false, have_retained = false;
  for (const EventRecord& e : input.events) {
    const std::uint64_t t = input.t_abs_ticks(e);
    if (have_prev && t <= prev_abs) {
      throw PipelineError("afterpulse-filter", "events not strictly ordered");
    }
    prev_abs = t;
    have_prev = true;
    if (have_retained && t - last_retained < cutoff_ticks) continue;
    out.events.push_back(e);
    last_retained = t;
    have_retained = true;
  }
  return out;
}

// Per-bin dead-time correction: counts[i] / (1 - B_i) with B_i the average
// probability that the detector is dead at bin i, i.e. the mean occupancy of
// the preceding effective-dead window (wrapping across the shot boundary).
// The histogram must cover the full trigger period so the wrap is exact.
inline TimeHistogram deadtime_correct(const TimeHistogram& hist, double effective_dead,
                                      double rep_period) {
  hist.validate_raw();
  if (hist.corrected()) {
    throw PipelineError("deadtime-correct", "histogram is already corrected");
  }
  if (!(effective_dead > 0.0 && effective_dead < rep_period)) {
    throw ValidationError("effective dead time must lie in (0, rep_period)");
  }
  if (hist.n_shots == 0) throw ValidationError("histogram has no trigger count");
  const std::uint64_t bin_ps = static_cast<std::uint64_t>(std::llround(hist.bin_width * 1e12));
  const std::uint64_t rep_ps = static_cast<std::uint64_t>(std::llround(rep_period * 1e12));
  if (bin_ps == 0 || rep_ps != bin_ps * hist.size()) {
    throw ValidationError("dead-time correction needs a full-period histogram");
  }
  const std::uint64_t dead_ps = static_cast<std::uint64_t>(std::llround(effective_dead * 1e12));
  const std::size_t k_bins = static_cast<std::size_t>((dead_ps + bin_ps - 1) / bin_ps);
  const std::size_t n = hist.size();

  TimeHistogram out = hist;
  out.corrections.assign(n, 1.0);
  const double inv_shots = 1.0 / static_cast<double>(hist.n_shots);
  // Sliding occupancy of the k_bins preceding bins, circular.
  double occupancy = 0.0;
  for (std::size_t k = 1; k <= k_bins; ++k) occupancy += hist.counts[n - k];
  for (std::size_t i = 0; i < n; ++i) {
    const double busy = occupancy * inv_shots;
    if (busy >= 0.99) {
      throw PipelineError("deadtime-correct", "saturation: dead probability >= 0.99");
    }
    const double factor = 1.0 / (1.0 - busy);
    out.corrections[i] = factor;
    out.counts[i] = hist.counts[i] * factor;
    out.variance[i] = hist.variance[i] * factor * factor;
    occupancy += hist.counts[i] - hist.counts[(i + n - k_bins) % n];
  }
  return out;
}

namespace detail {

struct Wls2Result {
  double a = 0.0, b = 0.0;
  double var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
  bool singular = false;
};

// Weighted least squares of y against two columns, solved by normal
// equations with a small ridge for conditioning.
inline Wls2Result wls_two_columns(const std::vector<double>& y, const std::vector<double>& w,
                                  const std::vector<double>& c1, const std::vector<double>& c2) {
  double g11 = 0.0, g12 = 0.0, g22 = 0.0, r1 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    g11 += w[i] * c1[i] * c1[i];
    g12 += w[i] * c1[i] * c2[i];
    g22 += w[i] * c2[i] * c2[i];
    r1 += w[i] * c1[i] * y[i];
    r2 += w[i] * c2[i] * y[i];
  }
  const double ridge = 1e-12 * (g11 + g22);
  g11 += ridge;
  g22 += ridge;
  const double det = g11 * g22 - g12 * g12;
  Wls2Result res;
  if (!(det > 1e-9 * g11 * g22) || !(g11 > 0.0) || !(g22 > 0.0)) {
    res.singular = true;
    return res;
  }
  res.a = (g22 * r1 - g12 * r2) / det;
  res.b = (g11 * r2 - g12 * r1) / det;
  res.var_a = g22 / det;
  res.var_b = g11 / det;
  res.cov_ab = -g12 / det;
  return res;
}

inline std::vector<double> poisson_weights(const TimeHistogram& h, std::size_t lo,
                                           std::size_t hi) {
  std::vector<double> w(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const double v = std::max(h.variance[i], 1.0);
    w[i - lo] = 1.0 / v;
  }
  return w;
}

inline std::size_t bin_floor(const TimeHistogram& h, double t) {
  if (t <= 0.0) return 0;
  const auto b = static_cast<std::size_t>(t / h.bin_width);
  return std::min(b, h.size());
}

}  // namespace detail

// Decomposition of an epsilon = 0 reference measurement into a pure
// exponential part (the incoherent background) and the small coherent
// sin^2(delta t) part, with gamma and delta fixed by the model. The isolated
// exponential component is what gets subtracted from data runs.
struct ReferenceFit {
  std::vector<double> exp_component;       // counts per bin
  std::vector<double> coherent_component;  // counts per bin
  std::vector<double> exp_variance;        // variance of exp_component per bin
  double amp_exp = 0.0;                    // A
  double amp_coh = 0.0;                    // B
  double amp_exp_se = 0.0;
  double amp_coh_se = 0.0;
  std::uint64_t n_shots = 0;
  double bin_width = 0.0;
};

inline ReferenceFit fit_reference(const TimeHistogram& hist, const VSystemParams& params,
                                  double fit_window = 0.0) {
  hist.validate_raw();
  params.validate();
  if (fit_window <= 0.0) fit_window = 20.0 / params.gamma;
  const std::size_t lo = 0;
  const std::size_t hi = std::max<std::size_t>(detail::bin_floor(hist, fit_window), 2);

  VSystemParams coh = params;
  coh.epsilon = 0.0;
  const bool coh_defined = coh.delta > 0.0;

  std::vector<double> col_exp(hist.size()), col_coh(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double t = hist.bin_center(i);
    col_exp[i] = convolved_exponential_pdf(t, params.gamma, params.pulse) * hist.bin_width;
    col_coh[i] = coh_defined ? convolved_pdf(t, coh) * hist.bin_width : 0.0;
  }

  std::vector<double> y(hist.counts.begin() + lo, hist.counts.begin() + hi);
  std::vector<double> w = detail::poisson_weights(hist, lo, hi);
  std::vector<double> c1(col_exp.begin() + lo, col_exp.begin() + hi);
  std::vector<double> c2(col_coh.begin() + lo, col_coh.begin() + hi);
  const auto fit = detail::wls_two_columns(y, w, c1, c2);
  if (fit.singular) {
    throw PipelineError("reference-fit",
                        "singular normal equations (window too short or delta = 0)");
  }

  ReferenceFit ref;
  ref.amp_exp = std::max(fit.a, 0.0);
  ref.amp_coh = std::max(fit.b, 0.0);
  ref.amp_exp_se = std::sqrt(std::max(fit.var_a, 0.0));
  ref.amp_coh_se = std::sqrt(std::max(fit.var_b, 0.0));
  ref.n_shots = hist.n_shots;
  ref.bin_width = hist.bin_width;
  ref.exp_component.resize(hist.size());
  ref.coherent_component.resize(hist.size());
  ref.exp_variance.resize(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    ref.exp_component[i] = ref.amp_exp * col_exp[i];
    ref.coherent_component[i] = ref.amp_coh * col_coh[i];
    ref.exp_variance[i] = fit.var_a * col_exp[i] * col_exp[i];
  }
  return ref;
}

// Subtract the isolated exponential component, averaged over the reference
// measurements taken before and after the data run. Reference amplitudes are
// compared per shot; disagreement beyond the stability tolerance signals a
// drifting system and aborts. Components are rescaled by the shot-count
// ratio, which reduces to plain subtraction for equal-duration interleaved
// references.
inline TimeHistogram subtract_background(const TimeHistogram& data, const ReferenceFit& before,
                                         const ReferenceFit& after,
                                         double stability_tol = 0.05) {
  data.validate_raw();
  if (before.exp_component.size() != data.size() ||
      after.exp_component.size() != data.size() || before.bin_width != data.bin_width ||
      after.bin_width != data.bin_width) {
    throw ValidationError("reference fits do not match the data histogram binning");
  }
  if (before.n_shots == 0 || after.n_shots == 0 || data.n_shots == 0) {
    throw ValidationError("histograms need trigger counts for subtraction");
  }
  const double rate_b = before.amp_exp / static_cast<double>(before.n_shots);
  const double rate_a = after.amp_exp / static_cast<double>(after.n_shots);
  const double mean_rate = 0.5 * (rate_b + rate_a);
  if (mean_rate > 0.0 && std::abs(rate_b - rate_a) > stability_tol * mean_rate) {
    throw PipelineError("subtract-background", "reference measurements disagree beyond " +
                                                   std::to_string(stability_tol * 100.0) + "%");
  }
  const double scale_b = static_cast<double>(data.n_shots) / static_cast<double>(before.n_shots);
  const double scale_a = static_cast<double>(data.n_shots) / static_cast<double>(after.n_shots);

  TimeHistogram out = data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double sub =
        0.5 * (before.exp_component[i] * scale_b + after.exp_component[i] * scale_a);
    out.counts[i] = std::max(data.counts[i] - sub, 0.0);
    out.variance[i] = data.variance[i] + 0.25 * (before.exp_variance[i] * scale_b * scale_b +
                                                 after.exp_variance[i] * scale_a * scale_a);
  }
  return out;
}

// Fit outputs. A scale-only fit leaves gamma_eff at the model value; a free
// decay fit fills it with its own estimate.
struct AnalysisResult {
  double scale = 0.0;
  double gamma_eff = 0.0;
  double gamma_eff_se = 0.0;
  double mean_arrival = 0.0;
  double mean_arrival_se = 0.0;
  double chi2_reduced = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

// The shape is fully fixed by the model; only an amplitude is fitted.
inline AnalysisResult fit_scale_only(const TimeHistogram& hist, const VSystemParams& params,
                                     double fit_window = 0.0) {
  hist.validate_raw();
  params.validate();
  params.require_non_degenerate();
  if (fit_window <= 0.0) fit_window = 20.0 / params.gamma;
  const std::size_t hi = detail::bin_floor(hist, fit_window);
  if (hi < 2) throw PipelineError("scale-fit", "empty fit window");

  double swm2 = 0.0, swym = 0.0;
  for (std::size_t i = 0; i < hi; ++i) {
    const double m = convolved_pdf(hist.bin_center(i), params) * hist.bin_width;
    const double w = 1.0 / std::max(hist.variance[i], 1.0);
    swm2 += w * m * m;
    swym += w * hist.counts[i] * m;
  }
  if (!(swm2 > 0.0)) throw PipelineError("scale-fit", "model vanishes on the fit window");
  const double scale = swym / swm2;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < hi; ++i) {
    const double m = convolved_pdf(hist.bin_center(i), params) * hist.bin_width;
    const double w = 1.0 / std::max(hist.variance[i], 1.0);
    const double r = hist.counts[i] - scale * m;
    chi2 += w * r * r;
  }

  AnalysisResult res;
  res.scale = scale;
  res.gamma_eff = params.gamma;
  res.gamma_eff_se = 0.0;
  res.chi2_reduced = chi2 / static_cast<double>(hi - 1);
  res.window_lo = 0.0;
  res.window_hi = static_cast<double>(hi) * hist.bin_width;
  return res;
}

// Two-parameter (scale, rate) exponential fit on the tail window past the
// excitation pulse. Used to measure the effective decay constant; the
// exponential description holds while delta * t stays small against epsilon,
// so the default window ends at epsilon / (10 delta).
inline AnalysisResult fit_free_gamma(const TimeHistogram& hist, const VSystemParams& params,
                                     double window_lo = -1.0, double window_hi = -1.0) {
  hist.validate_raw();
  params.validate();
  if (window_lo < 0.0) window_lo = params.pulse.duration + 2e-9;
  if (window_hi < 0.0) {
    window_hi = 20.0 / params.gamma;
    if (params.delta > 0.0 && params.epsilon > 0.0) {
      window_hi = std::min(window_hi, params.epsilon / (10.0 * params.delta));
    }
  }
  const std::size_t lo = detail::bin_floor(hist, window_lo);
  const std::size_t hi = detail::bin_floor(hist, window_hi);
  if (hi <= lo + 8) throw PipelineError("free-gamma-fit", "fit window too short");

  const auto chi2_at = [&](double rate, double* scale_out) {
    double swm2 = 0.0, swym = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double m = std::exp(-rate * hist.bin_center(i));
      const double w = 1.0 / std::max(hist.variance[i], 1.0);
      swm2 += w * m * m;
      swym += w * hist.counts[i] * m;
    }
    const double s = swm2 > 0.0 ? swym / swm2 : 0.0;
    double chi2 = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double m = std::exp(-rate * hist.bin_center(i));
      const double w = 1.0 / std::max(hist.variance[i], 1.0);
      const double r = hist.counts[i] - s * m;
      chi2 += w * r * r;
    }
    if (scale_out) *scale_out = s;
    return chi2;
  };

  // Golden-section on the rate with an inner linear solve for the scale.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.05 * params.gamma, b = 5.0 * params.gamma;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = chi2_at(c, nullptr), fd = chi2_at(d, nullptr);
  for (int iter = 0; iter < 200 && (b - a) > 1e-10 * params.gamma; ++iter) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = chi2_at(c, nullptr);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = chi2_at(d, nullptr);
    }
  }
  const double rate = 0.5 * (a + b);
  double scale = 0.0;
  const double chi2_min = chi2_at(rate, &scale);
  if (!(rate > 0.051 * params.gamma) || !(rate < 4.9 * params.gamma)) {
    throw PipelineError("free-gamma-fit", "fit did not converge inside the rate bracket");
  }
  // Standard error from the local curvature of chi^2 (delta chi^2 = 1).
  const double h = 1e-4 * rate;
  const double curv = (chi2_at(rate + h, nullptr) - 2.0 * chi2_min + chi2_at(rate - h, nullptr)) /
                      (h * h);
  const double se = curv > 0.0 ? std::sqrt(2.0 / curv) : 0.0;

  AnalysisResult res;
  res.scale = scale;
  res.gamma_eff = rate;
  res.gamma_eff_se = se;
  res.chi2_reduced = chi2_min / static_cast<double>(hi - lo - 2);
  res.window_lo = static_cast<double>(lo) * hist.bin_width;
  res.window_hi = static_cast<double>(hi) * hist.bin_width;
  return res;
}

// First moment of the histogram over [window_lo, window_hi), bin centers,
// minus the mean emission-time offset of the excitation pulse. The standard
// error propagates the per-bin variance channel.
inline ValueWithError estimate_mean_arrival(const TimeHistogram& hist, double window_lo,
                                            double window_hi, double pulse_mean_offset = 0.0) {
  hist.validate_raw();
  const std::size_t lo = detail::bin_floor(hist, window_lo);
  const std::size_t hi = detail::bin_floor(hist, window_hi);
  if (hi <= lo) throw PipelineError("mean-arrival", "empty moment window");
  double total = 0.0, first = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    total += hist.counts[i];
    first += hist.counts[i] * hist.bin_center(i);
  }
  if (!(total > 0.0)) throw PipelineError("mean-arrival", "no counts in the moment window");
  const double mean_raw = first / total;
  double var = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = hist.bin_center(i) - mean_raw;
    var += hist.variance[i] * d * d;
  }
  return {mean_raw - pulse_mean_offset, std::sqrt(var) / total};
}

// Gaussian low-pass for display; `full_width` is the FWHM. Never applied
// before fitting or moment estimation.
inline TimeHistogram smooth_gaussian(const TimeHistogram& hist, double full_width) {
  hist.validate_raw();
  if (!(full_width > hist.bin_width)) {
    throw ValidationError("smoothing width must exceed the bin width");
  }
  const double sigma = full_width / 2.354820045030949;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma / hist.bin_width));
  std::vector<double> kernel(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j) {
    const double x = static_cast<double>(j) * hist.bin_width / sigma;
    kernel[j + radius] = std::exp(-0.5 * x * x);
  }
  TimeHistogram out = hist;
  const int n = static_cast<int>(hist.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0, vacc = 0.0, norm = 0.0;
    for (int j = -radius; j <= radius; ++j) {
      const int k = i + j;
      if (k < 0 || k >= n) continue;  // edge bins renormalize over the in-range kernel
      const double w = kernel[j + radius];
      acc += w * hist.counts[k];
      vacc += w * w * hist.variance[k];
      norm += w;
    }
    out.counts[i] = acc / norm;
    out.variance[i] = vacc / (norm * norm);
  }
  return out;
}

}  // namespace weakbeam
