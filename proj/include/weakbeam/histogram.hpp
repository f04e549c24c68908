#pragma once

#include <cstdint>
#include <vector>

#include "weakbeam/errors.hpp"
#include "weakbeam/events.hpp"

namespace weakbeam {

// Binned arrival-time record. Counts are real-valued because the dead-time
// correction and background subtraction rescale them; `variance` carries the
// propagated per-bin variance (Poisson at histogram time), `corrections` the
// per-bin dead-time factors once applied.
struct TimeHistogram {
  double bin_width = 0.0;  // seconds
  std::vector<double> counts;
  std::vector<double> variance;
  std::vector<double> corrections;  // empty until deadtime_correct runs
  std::uint64_t n_shots = 0;

  std::size_t size() const { return counts.size(); }
  double bin_center(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) * bin_width;
  }
  bool corrected() const { return !corrections.empty(); }

  void validate_raw() const {
    if (counts.empty()) throw ValidationError("histogram has no bins");
    if (variance.size() != counts.size()) {
      throw ValidationError("histogram variance channel length mismatch");
    }
    if (!corrections.empty() && corrections.size() != counts.size()) {
      throw ValidationError("histogram correction channel length mismatch");
    }
  }
};

// Bin events by time-since-trigger over [0, window). The histogram bin width
// may be any integer multiple of the digitizer tick.
inline TimeHistogram histogram(const EventStream& stream, std::uint64_t bin_width_ps,
                               std::uint64_t window_ps) {
  if (bin_width_ps == 0 || bin_width_ps % stream.bin_width_ps != 0) {
    throw ValidationError("histogram bin width must be a multiple of the digitizer tick");
  }
  if (window_ps == 0 || window_ps % bin_width_ps != 0) {
    throw ValidationError("histogram window must be a multiple of the bin width");
  }
  if (window_ps > stream.rep_period_ps) {
    throw ValidationError("histogram window must not exceed the trigger period");
  }
  const std::uint64_t ticks_per_bin = bin_width_ps / stream.bin_width_ps;
  const std::uint64_t n_bins = window_ps / bin_width_ps;

  TimeHistogram hist;
  hist.bin_width = static_cast<double>(bin_width_ps) * 1e-12;
  hist.counts.assign(n_bins, 0.0);
  hist.n_shots = stream.n_shots;

  std::uint64_t prev_abs = 0;
  bool have_prev = false;
  for (const EventRecord& e : stream.events) {
    const std::uint64_t t_abs = stream.t_abs_ticks(e);
    if (have_prev && t_abs <= prev_abs) {
      throw PipelineError("histogram", "events not strictly ordered by absolute time");
    }
    prev_abs = t_abs;
    have_prev = true;
    const std::uint64_t bin = e.t_rel_ticks / ticks_per_bin;
    if (bin < n_bins) hist.counts[bin] += 1.0;
  }
  hist.variance = hist.counts;
  return hist;
}

}  // namespace weakbeam
