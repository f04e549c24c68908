#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakbeam/errors.hpp"
#include "weakbeam/params.hpp"
#include "weakbeam/rng.hpp"

namespace weakbeam {

// Ground-truth label attached by the simulator. Analysis code never reads it;
// tests do.
enum class EventTag : std::uint8_t { Signal = 0, Background = 1, Afterpulse = 2 };

inline const char* tag_name(EventTag t) {
  switch (t) {
    case EventTag::Signal: return "signal";
    case EventTag::Background: return "background";
    case EventTag::Afterpulse: return "afterpulse";
  }
  return "?";
}

inline EventTag tag_from_name(const std::string& s) {
  if (s == "signal") return EventTag::Signal;
  if (s == "background") return EventTag::Background;
  if (s == "afterpulse") return EventTag::Afterpulse;
  throw ParseError("unknown event tag '" + s + "'");
}

// One detector click. Times are digitizer ticks (multiples of bin_width);
// the absolute time is shot_index * rep_period + t_rel.
struct EventRecord {
  std::uint64_t shot_index = 0;
  std::uint64_t t_rel_ticks = 0;
  EventTag tag = EventTag::Signal;
};

struct DetectorConfig {
  bool enabled = true;
  double dead_time = 52e-9;      // seconds
  double afterpulse_prob = 0.02; // at the end of each dead time
  double bin_width = 100e-12;    // digitizer resolution, seconds

  void validate() const {
    if (dead_time < 0.0) throw ValidationError("dead_time must be >= 0");
    if (!(afterpulse_prob >= 0.0 && afterpulse_prob <= 0.1)) {
      throw ValidationError("afterpulse_prob must lie in [0, 0.1]");
    }
    if (!(bin_width > 0.0)) throw ValidationError("bin_width must be > 0");
  }
};

struct SimConfig {
  VSystemParams physics;
  std::uint64_t n_shots = 0;
  double rep_period = 2e-6;        // seconds between triggers
  double detect_prob = 0.01;       // photon reaches the detector path
  double background_fraction = 0.12;  // of total detected signal at the eps=0 reference
  std::uint64_t rng_seed = 1;
  DetectorConfig detector;

  void validate() const {
    physics.validate();
    physics.require_non_degenerate();
    detector.validate();
    if (n_shots < 1) throw ValidationError("n_shots must be >= 1");
    if (!(rep_period > 20.0 / physics.gamma)) {
      throw ValidationError("rep_period must exceed 20 lifetimes (tail truncation)");
    }
    if (!(detect_prob > 0.0 && detect_prob <= 1.0)) {
      throw ValidationError("detect_prob must lie in (0, 1]");
    }
    if (!(background_fraction >= 0.0 && background_fraction < 0.5)) {
      throw ValidationError("background_fraction must lie in [0, 0.5)");
    }
    if (detector.dead_time >= rep_period) {
      throw ValidationError("dead_time must be smaller than rep_period");
    }
    // The digitizer ticks must tile the trigger period exactly.
    if (rep_period_ticks() * bin_width_ps() != rep_period_ps()) {
      throw ValidationError("rep_period must be an integer multiple of bin_width");
    }
  }

  std::uint64_t bin_width_ps() const {
    return static_cast<std::uint64_t>(std::llround(detector.bin_width * 1e12));
  }
  std::uint64_t rep_period_ps() const {
    return static_cast<std::uint64_t>(std::llround(rep_period * 1e12));
  }
  std::uint64_t rep_period_ticks() const { return rep_period_ps() / bin_width_ps(); }

  // Salt mixed into every derived RNG stream: different configurations give
  // statistically independent streams, identical configurations reproduce
  // bit-identical ones.
  std::uint64_t stream_salt() const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    h = hash_combine(h, physics.gamma);
    h = hash_combine(h, physics.delta);
    h = hash_combine(h, physics.epsilon);
    h = hash_combine(h, static_cast<std::uint64_t>(physics.pulse.kind));
    h = hash_combine(h, physics.pulse.duration);
    h = hash_combine(h, rep_period);
    h = hash_combine(h, detect_prob);
    h = hash_combine(h, background_fraction);
    h = hash_combine(h, static_cast<std::uint64_t>(detector.enabled));
    h = hash_combine(h, detector.dead_time);
    h = hash_combine(h, detector.afterpulse_prob);
    h = hash_combine(h, detector.bin_width);
    return h;
  }
};

// Event list plus the digitizer context needed to interpret it; mirrors the
// WBEV file header.
struct EventStream {
  std::uint64_t bin_width_ps = 100;
  std::uint64_t rep_period_ps = 2000000;
  std::uint64_t n_shots = 0;
  std::vector<EventRecord> events;

  std::uint64_t rep_ticks() const { return rep_period_ps / bin_width_ps; }
  std::uint64_t t_abs_ticks(const EventRecord& e) const {
    return e.shot_index * rep_ticks() + e.t_rel_ticks;
  }
  double bin_width_s() const { return static_cast<double>(bin_width_ps) * 1e-12; }
};

}  // namespace weakbeam
