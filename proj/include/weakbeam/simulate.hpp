#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "weakbeam/events.hpp"
#include "weakbeam/pointer_model.hpp"
#include "weakbeam/sampling.hpp"

namespace weakbeam {

// Per-shot probability of a detected signal photon: detection-path efficiency
// times the postselection acceptance.
inline double signal_probability(const SimConfig& config) {
  return config.detect_prob * postselection_acceptance(config.physics);
}

// Per-shot background probability, pinned so that at the epsilon = 0
// reference the background makes up `background_fraction` of the detected
// total. The background amplitude itself does not depend on epsilon.
inline double background_probability(const SimConfig& config) {
  if (config.background_fraction <= 0.0) return 0.0;
  VSystemParams ref = config.physics;
  ref.epsilon = 0.0;
  if (ref.degenerate()) {
    throw ValidationError("background_fraction > 0 requires delta > 0 (epsilon = 0 reference)");
  }
  const double p_sig_ref = config.detect_prob * postselection_acceptance(ref);
  return config.background_fraction / (1.0 - config.background_fraction) * p_sig_ref;
}

namespace detail {

constexpr std::uint64_t kShotsPerBlock = 1u << 20;
constexpr std::uint64_t kDetectorStreamTag = 0xD47EC702ull;

// Skip directly to the next shot carrying an event: shots are i.i.d.
// Bernoulli(p), so the gap is geometric. Returns a value past `remaining`
// when the block holds no further event.
inline std::uint64_t geometric_gap(double p_event, std::mt19937_64& rng,
                                   std::uint64_t remaining) {
  const double u = 1.0 - uniform01(rng);  // in (0, 1]
  const double g = std::floor(std::log(u) / std::log1p(-p_event));
  if (!(g < static_cast<double>(remaining))) return remaining;
  return static_cast<std::uint64_t>(g);
}

}  // namespace detail

// Pre-detector candidate events: at most one detected photon per shot
// (sparse single-photon counting regime), arrival times quantized to
// digitizer ticks by floor. Draws whose relative time falls beyond the
// trigger period are redrawn; the configuration bound rep_period > 20/gamma
// keeps that truncation below exp(-20).
inline EventStream generate_candidates(const SimConfig& config) {
  config.validate();
  const double p_sig = signal_probability(config);
  const double p_bg = background_probability(config);
  const double p_event = p_sig + p_bg;
  if (!(p_event > 0.0 && p_event <= 1.0)) {
    throw ValidationError("per-shot event probability must lie in (0, 1]");
  }

  EventStream stream;
  stream.bin_width_ps = config.bin_width_ps();
  stream.rep_period_ps = config.rep_period_ps();
  stream.n_shots = config.n_shots;
  stream.events.reserve(static_cast<std::size_t>(
      std::min(1.1 * p_event * static_cast<double>(config.n_shots) + 64.0, 2e9)));

  const std::uint64_t salt = config.stream_salt();
  const double bin_w = config.detector.bin_width;
  const std::uint64_t n_blocks =
      (config.n_shots + detail::kShotsPerBlock - 1) / detail::kShotsPerBlock;

  for (std::uint64_t block = 0; block < n_blocks; ++block) {
    auto rng = make_block_rng(config.rng_seed, salt, block);
    const std::uint64_t block_begin = block * detail::kShotsPerBlock;
    const std::uint64_t block_end =
        std::min(config.n_shots, block_begin + detail::kShotsPerBlock);
    std::uint64_t shot = block_begin;
    for (;;) {
      const std::uint64_t gap = detail::geometric_gap(p_event, rng, block_end - shot);
      shot += gap;
      if (shot >= block_end) break;
      const bool is_signal = uniform01(rng) * p_event < p_sig;
      double t_rel;
      do {
        t_rel = is_signal
                    ? sample_arrival(config.physics, rng)
                    : sample_background(config.physics.gamma, config.physics.pulse, rng);
      } while (t_rel >= config.rep_period);
      EventRecord rec;
      rec.shot_index = shot;
      rec.t_rel_ticks = static_cast<std::uint64_t>(std::floor(t_rel / bin_w));
      rec.tag = is_signal ? EventTag::Signal : EventTag::Background;
      stream.events.push_back(rec);
      ++shot;
      if (shot >= block_end) break;
    }
  }
  return stream;
}

// Detector model: a strictly sequential sweep over the merged absolute-time
// stream (dead time couples neighboring events).
//
//  - any candidate within dead_time of the previously accepted event is lost;
//  - at each accepted event's dead-time end an afterpulse fires with
//    probability afterpulse_prob; an afterpulse can trigger one more
//    (second order), deeper chains are not modeled;
//  - the dead time is rounded up to whole digitizer ticks, so the spacing
//    invariant holds exactly on the quantized timeline.
inline EventStream apply_detector(const EventStream& input, const DetectorConfig& detector,
                                  std::mt19937_64& rng) {
  detector.validate();
  if (!detector.enabled) return input;

  const std::uint64_t bin_ps = input.bin_width_ps;
  const std::uint64_t dead_ps =
      static_cast<std::uint64_t>(std::llround(detector.dead_time * 1e12));
  const std::uint64_t dead_ticks = (dead_ps + bin_ps - 1) / bin_ps;
  const std::uint64_t rep_ticks = input.rep_ticks();
  const std::uint64_t run_end_ticks = input.n_shots * rep_ticks;

  EventStream out;
  out.bin_width_ps = input.bin_width_ps;
  out.rep_period_ps = input.rep_period_ps;
  out.n_shots = input.n_shots;
  out.events.reserve(input.events.size());

  bool have_last = false;
  std::uint64_t last_accepted = 0;
  bool pending = false;
  std::uint64_t pending_t = 0;
  int pending_order = 0;

  auto accept = [&](std::uint64_t t_abs, EventTag tag, int afterpulse_order) {
    out.events.push_back({t_abs / rep_ticks, t_abs % rep_ticks, tag});
    last_accepted = t_abs;
    have_last = true;
    if (afterpulse_order < 2 && detector.afterpulse_prob > 0.0 &&
        uniform01(rng) < detector.afterpulse_prob) {
      pending = true;
      pending_t = t_abs + dead_ticks;
      pending_order = afterpulse_order + 1;
    }
  };

  auto flush_pending_before = [&](std::uint64_t limit_ticks) {
    while (pending && pending_t <= limit_ticks) {
      pending = false;
      if (pending_t >= run_end_ticks) break;  // digitizer stopped with the run
      // An afterpulse sits exactly at the dead-time end, so it is never lost
      // to the dead time it follows.
      accept(pending_t, EventTag::Afterpulse, pending_order);
    }
  };

  std::uint64_t prev_t = 0;
  bool have_prev = false;
  for (const EventRecord& e : input.events) {
    const std::uint64_t t = input.t_abs_ticks(e);
    if (have_prev && t <= prev_t) {
      throw PipelineError("detector", "candidate events not strictly ordered");
    }
    prev_t = t;
    have_prev = true;
    flush_pending_before(t);
    if (have_last && dead_ticks > 0 && t - last_accepted < dead_ticks) continue;
    accept(t, e.tag, 0);
  }
  flush_pending_before(run_end_ticks);
  return out;
}

// Full shot-based Monte Carlo run. Identical configurations (including the
// seed) produce bit-identical streams.
inline EventStream run_simulation(const SimConfig& config) {
  EventStream candidates = generate_candidates(config);
  if (!config.detector.enabled) return candidates;
  std::uint64_t s = config.rng_seed;
  s = hash_combine(s, config.stream_salt());
  s = hash_combine(s, detail::kDetectorStreamTag);
  std::mt19937_64 det_rng(s);
  return apply_detector(candidates, config.detector, det_rng);
}

}  // namespace weakbeam
