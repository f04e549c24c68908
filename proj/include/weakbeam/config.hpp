#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "weakbeam/errors.hpp"
#include "weakbeam/events.hpp"
#include "weakbeam/io.hpp"
#include "weakbeam/params.hpp"

namespace weakbeam {

// Fully resolved run configuration. Configuration frequencies are cyclic
// (Hz) in the file and converted to angular units here; gamma may be given
// either as a lifetime or as a linewidth (FWHM, Hz).
struct RunConfig {
  // physics
  double gamma_lifetime_ns = 26.0;
  double delta_hz = 600e3;
  double epsilon_rad = 0.2;
  std::string pulse_kind = "square";
  double pulse_ns = 4.2;
  // simulation
  double n_shots = 1e7;
  double rep_period_ns = 2000.0;
  double detect_prob = 0.01;
  double background_fraction = 0.12;
  std::uint64_t rng_seed = 12345;
  bool detector_enabled = true;
  double dead_time_ns = 52.0;
  double afterpulse_prob = 0.02;
  double bin_width_ps = 100.0;
  // analysis
  double afterpulse_cutoff_ns = 115.0;
  double window_lifetimes = 20.0;
  double stability_tol = 0.05;
  double smooth_fwhm_ns = 4.2;
  // io
  std::string input;
  std::string ref_before;
  std::string ref_after;
  std::string out_dir = ".";
  // sweep / crlb grids
  std::vector<double> epsilon_list;
  std::vector<double> seed_list;
  std::vector<double> count_rate_hz{1e6};

  VSystemParams physics() const {
    VSystemParams p;
    p.gamma = 1.0 / (gamma_lifetime_ns * 1e-9);
    p.delta = 2.0 * M_PI * delta_hz;
    p.epsilon = epsilon_rad;
    p.pulse = pulse_kind == "delta" ? PulseShape::delta_impulse()
                                    : PulseShape::square(pulse_ns * 1e-9);
    return p;
  }

  SimConfig sim() const {
    SimConfig s;
    s.physics = physics();
    s.n_shots = static_cast<std::uint64_t>(std::llround(n_shots));
    s.rep_period = rep_period_ns * 1e-9;
    s.detect_prob = detect_prob;
    s.background_fraction = background_fraction;
    s.rng_seed = rng_seed;
    s.detector.enabled = detector_enabled;
    s.detector.dead_time = dead_time_ns * 1e-9;
    s.detector.afterpulse_prob = afterpulse_prob;
    s.detector.bin_width = bin_width_ps * 1e-12;
    return s;
  }

  void validate(bool needs_input = false) const {
    if (!(gamma_lifetime_ns > 0.0)) throw ValidationError("gamma: lifetime must be > 0");
    if (!(delta_hz >= 0.0)) throw ValidationError("delta_hz must be >= 0");
    if (pulse_kind != "square" && pulse_kind != "delta") {
      throw ValidationError("pulse_kind must be 'square' or 'delta'");
    }
    physics().validate();
    if (!(afterpulse_cutoff_ns * 1e-9 >= dead_time_ns * 1e-9)) {
      throw ValidationError("afterpulse_cutoff_ns must be >= dead_time_ns");
    }
    if (!(window_lifetimes > 0.0)) throw ValidationError("window_lifetimes must be > 0");
    if (!(stability_tol > 0.0)) throw ValidationError("stability_tol must be > 0");
    if (needs_input && input.empty()) throw ValidationError("input path is required");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("expected a boolean, got '" + v + "'", line);
}

inline std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parse_number(t, line));
  }
  return out;
}

}  // namespace detail

// Parse `key = value` lines; `#` starts a comment, `[section]` headers are
// allowed and ignored (the key namespace is flat). Every key is validated;
// unknown keys are parse errors with their line number.
inline RunConfig parse_config(std::istream& is, const std::string& origin) {
  RunConfig cfg;
  bool have_lifetime = false, have_linewidth = false;
  double gamma_hz = 0.0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' in " + origin, lineno);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key in " + origin, lineno);

    auto num = [&] { return detail::parse_number(value, lineno); };
    if (key == "gamma_lifetime_ns") { cfg.gamma_lifetime_ns = num(); have_lifetime = true; }
    else if (key == "gamma_hz") { gamma_hz = num(); have_linewidth = true; }
    else if (key == "delta_hz") cfg.delta_hz = num();
    else if (key == "epsilon_rad") cfg.epsilon_rad = num();
    else if (key == "pulse_kind") cfg.pulse_kind = value;
    else if (key == "pulse_ns") cfg.pulse_ns = num();
    else if (key == "n_shots") cfg.n_shots = num();
    else if (key == "rep_period_ns") cfg.rep_period_ns = num();
    else if (key == "detect_prob") cfg.detect_prob = num();
    else if (key == "background_fraction") cfg.background_fraction = num();
    else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(num());
    else if (key == "detector_enabled") cfg.detector_enabled = detail::parse_bool(value, lineno);
    else if (key == "dead_time_ns") cfg.dead_time_ns = num();
    else if (key == "afterpulse_prob") cfg.afterpulse_prob = num();
    else if (key == "bin_width_ps") cfg.bin_width_ps = num();
    else if (key == "afterpulse_cutoff_ns") cfg.afterpulse_cutoff_ns = num();
    else if (key == "window_lifetimes") cfg.window_lifetimes = num();
    else if (key == "stability_tol") cfg.stability_tol = num();
    else if (key == "smooth_fwhm_ns") cfg.smooth_fwhm_ns = num();
    else if (key == "input") cfg.input = value;
    else if (key == "ref_before") cfg.ref_before = value;
    else if (key == "ref_after") cfg.ref_after = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "epsilon_list") cfg.epsilon_list = detail::parse_list(value, lineno);
    else if (key == "seed_list") cfg.seed_list = detail::parse_list(value, lineno);
    else if (key == "count_rate_hz") cfg.count_rate_hz = detail::parse_list(value, lineno);
    else throw ParseError("unknown key '" + key + "' in " + origin, lineno);
  }
  if (have_lifetime && have_linewidth) {
    throw ValidationError("gamma: give either gamma_lifetime_ns or gamma_hz, not both");
  }
  if (have_linewidth) {
    if (!(gamma_hz > 0.0)) throw ValidationError("gamma: linewidth must be > 0");
    cfg.gamma_lifetime_ns = 1e9 / (2.0 * M_PI * gamma_hz);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  return parse_config(is, path);
}

// Dump with every default resolved; the output is itself a loadable config
// that reproduces the identical run.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_double(v[i]);
    }
    return s;
  };
  os << "# resolved configuration\n";
  os << "gamma_lifetime_ns = " << format_double(c.gamma_lifetime_ns) << "\n";
  os << "delta_hz = " << format_double(c.delta_hz) << "\n";
  os << "epsilon_rad = " << format_double(c.epsilon_rad) << "\n";
  os << "pulse_kind = " << c.pulse_kind << "\n";
  os << "pulse_ns = " << format_double(c.pulse_ns) << "\n";
  os << "n_shots = " << format_double(c.n_shots) << "\n";
  os << "rep_period_ns = " << format_double(c.rep_period_ns) << "\n";
  os << "detect_prob = " << format_double(c.detect_prob) << "\n";
  os << "background_fraction = " << format_double(c.background_fraction) << "\n";
  os << "rng_seed = " << c.rng_seed << "\n";
  os << "detector_enabled = " << (c.detector_enabled ? "true" : "false") << "\n";
  os << "dead_time_ns = " << format_double(c.dead_time_ns) << "\n";
  os << "afterpulse_prob = " << format_double(c.afterpulse_prob) << "\n";
  os << "bin_width_ps = " << format_double(c.bin_width_ps) << "\n";
  os << "afterpulse_cutoff_ns = " << format_double(c.afterpulse_cutoff_ns) << "\n";
  os << "window_lifetimes = " << format_double(c.window_lifetimes) << "\n";
  os << "stability_tol = " << format_double(c.stability_tol) << "\n";
  os << "smooth_fwhm_ns = " << format_double(c.smooth_fwhm_ns) << "\n";
  if (!c.input.empty()) os << "input = " << c.input << "\n";
  if (!c.ref_before.empty()) os << "ref_before = " << c.ref_before << "\n";
  if (!c.ref_after.empty()) os << "ref_after = " << c.ref_after << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  if (!c.epsilon_list.empty()) os << "epsilon_list = " << list(c.epsilon_list) << "\n";
  if (!c.seed_list.empty()) os << "seed_list = " << list(c.seed_list) << "\n";
  os << "count_rate_hz = " << list(c.count_rate_hz) << "\n";
  return os.str();
}

}  // namespace weakbeam
