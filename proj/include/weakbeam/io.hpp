#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "weakbeam/analysis.hpp"
#include "weakbeam/errors.hpp"
#include "weakbeam/events.hpp"
#include "weakbeam/histogram.hpp"

namespace weakbeam {

// All text output rounds trips doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  os.write(b.data(), b.size());
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), b.size());
}

inline std::uint16_t get_u16(std::istream& is) {
  std::array<unsigned char, 2> b;
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b;
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline double parse_number(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line);
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// ---- binary event stream (magic "WBEV") ------------------------------------

inline constexpr std::uint16_t kWbevVersion = 1;

inline void write_wbev(const std::string& path, const EventStream& stream) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write("WBEV", 4);
  detail::put_u16(os, kWbevVersion);
  detail::put_u64(os, stream.bin_width_ps);
  detail::put_u64(os, stream.rep_period_ps);
  detail::put_u64(os, stream.n_shots);
  for (const EventRecord& e : stream.events) {
    detail::put_u64(os, e.shot_index);
    detail::put_u64(os, e.t_rel_ticks);
    os.put(static_cast<char>(e.tag));
  }
  if (!os) throw IoError("write failed on '" + path + "'");
}

inline EventStream read_wbev(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "WBEV") {
    throw ParseError("'" + path + "' is not a WBEV event file");
  }
  const std::uint16_t version = detail::get_u16(is);
  if (version != kWbevVersion) {
    throw ParseError("unsupported WBEV version " + std::to_string(version));
  }
  EventStream stream;
  stream.bin_width_ps = detail::get_u64(is);
  stream.rep_period_ps = detail::get_u64(is);
  stream.n_shots = detail::get_u64(is);
  if (!is) throw ParseError("truncated WBEV header in '" + path + "'");
  for (;;) {
    EventRecord e;
    e.shot_index = detail::get_u64(is);
    e.t_rel_ticks = detail::get_u64(is);
    const int tag = is.get();
    if (is.eof()) break;
    if (!is || tag < 0 || tag > 2) throw ParseError("corrupt WBEV record in '" + path + "'");
    e.tag = static_cast<EventTag>(tag);
    stream.events.push_back(e);
  }
  return stream;
}

// ---- event CSV --------------------------------------------------------------

inline void write_event_csv(const std::string& path, const EventStream& stream) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "# bin_width_ps=" << stream.bin_width_ps << ", rep_period_ps=" << stream.rep_period_ps
     << ", n_shots=" << stream.n_shots << "\n";
  os << "shot,t_rel_ps,tag\n";
  for (const EventRecord& e : stream.events) {
    os << e.shot_index << ',' << e.t_rel_ticks * stream.bin_width_ps << ',' << tag_name(e.tag)
       << '\n';
  }
  if (!os) throw IoError("write failed on '" + path + "'");
}

inline EventStream read_event_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  EventStream stream;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      if (line.find("bin_width_ps=") != std::string::npos) {
        std::sscanf(line.c_str(), "# bin_width_ps=%llu, rep_period_ps=%llu, n_shots=%llu",
                    reinterpret_cast<unsigned long long*>(&stream.bin_width_ps),
                    reinterpret_cast<unsigned long long*>(&stream.rep_period_ps),
                    reinterpret_cast<unsigned long long*>(&stream.n_shots));
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("shot,t_rel_ps,tag", 0) != 0) {
        throw ParseError("expected 'shot,t_rel_ps,tag' header", lineno);
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", lineno);
    EventRecord e;
    e.shot_index = static_cast<std::uint64_t>(detail::parse_number(fields[0], lineno));
    const auto t_ps = static_cast<std::uint64_t>(detail::parse_number(fields[1], lineno));
    if (t_ps % stream.bin_width_ps != 0) {
      throw ParseError("t_rel_ps is not a multiple of the digitizer tick", lineno);
    }
    e.t_rel_ticks = t_ps / stream.bin_width_ps;
    e.tag = tag_from_name(fields[2]);
    stream.events.push_back(e);
  }
  return stream;
}

// ---- histogram CSV ----------------------------------------------------------

inline void write_histogram_csv(const std::string& path, const TimeHistogram& hist) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  const auto bin_ps = static_cast<std::uint64_t>(std::llround(hist.bin_width * 1e12));
  os << "# bin_width_ps=" << bin_ps << ", n_shots=" << hist.n_shots
     << ", window_ps=" << bin_ps * hist.size() << ", corrected=" << (hist.corrected() ? 1 : 0)
     << "\n";
  os << "bin_index,count,variance,correction\n";
  for (std::size_t i = 0; i < hist.size(); ++i) {
    os << i << ',' << format_double(hist.counts[i]) << ',' << format_double(hist.variance[i])
       << ',' << format_double(hist.corrected() ? hist.corrections[i] : 1.0) << '\n';
  }
  if (!os) throw IoError("write failed on '" + path + "'");
}

inline TimeHistogram read_histogram_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  TimeHistogram hist;
  std::uint64_t bin_ps = 0;
  int corrected = 0;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      unsigned long long b = 0, n = 0, w = 0;
      int c = 0;
      if (std::sscanf(line.c_str(), "# bin_width_ps=%llu, n_shots=%llu, window_ps=%llu, corrected=%d",
                      &b, &n, &w, &c) >= 3) {
        bin_ps = b;
        hist.n_shots = n;
        corrected = c;
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("bin_index,count,variance,correction", 0) != 0) {
        throw ParseError("expected 'bin_index,count,variance,correction' header", lineno);
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 4) throw ParseError("expected 4 fields", lineno);
    hist.counts.push_back(detail::parse_number(fields[1], lineno));
    hist.variance.push_back(detail::parse_number(fields[2], lineno));
    if (corrected) hist.corrections.push_back(detail::parse_number(fields[3], lineno));
  }
  if (bin_ps == 0) throw ParseError("histogram CSV is missing its header metadata");
  hist.bin_width = static_cast<double>(bin_ps) * 1e-12;
  return hist;
}

// ---- analysis result (flat key = value block) -------------------------------

inline void write_result(const std::string& path, const AnalysisResult& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "scale = " << format_double(r.scale) << "\n"
     << "gamma_eff_per_s = " << format_double(r.gamma_eff) << "\n"
     << "gamma_eff_se_per_s = " << format_double(r.gamma_eff_se) << "\n"
     << "mean_arrival_s = " << format_double(r.mean_arrival) << "\n"
     << "mean_arrival_se_s = " << format_double(r.mean_arrival_se) << "\n"
     << "chi2_reduced = " << format_double(r.chi2_reduced) << "\n"
     << "window_lo_s = " << format_double(r.window_lo) << "\n"
     << "window_hi_s = " << format_double(r.window_hi) << "\n";
  if (!os) throw IoError("write failed on '" + path + "'");
}

inline AnalysisResult read_result(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  AnalysisResult r;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const double value = detail::parse_number(trim(line.substr(eq + 1)), lineno);
    if (key == "scale") r.scale = value;
    else if (key == "gamma_eff_per_s") r.gamma_eff = value;
    else if (key == "gamma_eff_se_per_s") r.gamma_eff_se = value;
    else if (key == "mean_arrival_s") r.mean_arrival = value;
    else if (key == "mean_arrival_se_s") r.mean_arrival_se = value;
    else if (key == "chi2_reduced") r.chi2_reduced = value;
    else if (key == "window_lo_s") r.window_lo = value;
    else if (key == "window_hi_s") r.window_hi = value;
    else throw ParseError("unknown result key '" + key + "'", lineno);
  }
  return r;
}

}  // namespace weakbeam
