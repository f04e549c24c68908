#pragma once

#include <cstdint>
#include <optional>

#include "weakbeam/analysis.hpp"
#include "weakbeam/events.hpp"
#include "weakbeam/histogram.hpp"
#include "weakbeam/pointer_model.hpp"

namespace weakbeam {

// End-to-end reduction of one measurement: afterpulse filter, full-period
// histogram, dead-time correction, reference-based background subtraction,
// scale-only and free-decay fits, mean arrival time.
struct PipelineOptions {
  VSystemParams physics;
  double afterpulse_cutoff = 115e-9;  // >= detector dead time
  bool detector_corrections = true;   // filter + dead-time correct
  double moment_window = 0.0;         // 0 -> 20 / gamma
  double fit_window = 0.0;            // 0 -> 20 / gamma
  std::uint64_t hist_bin_ps = 0;      // 0 -> digitizer tick
  double stability_tol = 0.05;
};

struct PipelineOutput {
  TimeHistogram raw;         // after the afterpulse filter, before corrections
  TimeHistogram corrected;   // after dead-time correction
  TimeHistogram subtracted;  // after background subtraction (== corrected without refs)
  std::optional<ReferenceFit> ref_before;
  std::optional<ReferenceFit> ref_after;
  AnalysisResult scale_fit;
  AnalysisResult free_gamma_fit;
  AnalysisResult result;  // combined summary
};

namespace detail {

inline TimeHistogram reduce_to_histogram(const EventStream& stream,
                                         const PipelineOptions& opt) {
  const std::uint64_t bin_ps = opt.hist_bin_ps ? opt.hist_bin_ps : stream.bin_width_ps;
  const double rep_s = static_cast<double>(stream.rep_period_ps) * 1e-12;
  if (!opt.detector_corrections) {
    return histogram(stream, bin_ps, stream.rep_period_ps);
  }
  const EventStream filtered = filter_afterpulses(stream, opt.afterpulse_cutoff);
  TimeHistogram hist = histogram(filtered, bin_ps, stream.rep_period_ps);
  return deadtime_correct(hist, opt.afterpulse_cutoff, rep_s);
}

}  // namespace detail

inline PipelineOutput run_pipeline(const EventStream& data,
                                   const EventStream* reference_before,
                                   const EventStream* reference_after,
                                   const PipelineOptions& opt) {
  opt.physics.validate();
  if ((reference_before == nullptr) != (reference_after == nullptr)) {
    throw PipelineError("subtract-background",
                        "background subtraction needs both reference measurements");
  }

  PipelineOutput out;
  const std::uint64_t bin_ps = opt.hist_bin_ps ? opt.hist_bin_ps : data.bin_width_ps;
  if (opt.detector_corrections) {
    const EventStream filtered = filter_afterpulses(data, opt.afterpulse_cutoff);
    out.raw = histogram(filtered, bin_ps, data.rep_period_ps);
    out.corrected = deadtime_correct(out.raw, opt.afterpulse_cutoff,
                                     static_cast<double>(data.rep_period_ps) * 1e-12);
  } else {
    out.raw = histogram(data, bin_ps, data.rep_period_ps);
    out.corrected = out.raw;
  }

  if (reference_before != nullptr) {
    VSystemParams ref_params = opt.physics;
    ref_params.epsilon = 0.0;
    const TimeHistogram hb = detail::reduce_to_histogram(*reference_before, opt);
    const TimeHistogram ha = detail::reduce_to_histogram(*reference_after, opt);
    out.ref_before = fit_reference(hb, ref_params);
    out.ref_after = fit_reference(ha, ref_params);
    out.subtracted =
        subtract_background(out.corrected, *out.ref_before, *out.ref_after, opt.stability_tol);
  } else {
    out.subtracted = out.corrected;
  }

  const double gamma = opt.physics.gamma;
  const double moment_hi = opt.moment_window > 0.0 ? opt.moment_window : 20.0 / gamma;
  out.scale_fit = fit_scale_only(out.subtracted, opt.physics, opt.fit_window);
  out.free_gamma_fit = fit_free_gamma(out.subtracted, opt.physics);
  const ValueWithError mean = estimate_mean_arrival(out.subtracted, 0.0, moment_hi,
                                                    opt.physics.pulse.mean_offset());

  out.result = out.scale_fit;
  out.result.gamma_eff = out.free_gamma_fit.gamma_eff;
  out.result.gamma_eff_se = out.free_gamma_fit.gamma_eff_se;
  out.result.mean_arrival = mean.value;
  out.result.mean_arrival_se = mean.se;
  out.result.window_lo = 0.0;
  out.result.window_hi = moment_hi;
  return out;
}

}  // namespace weakbeam
