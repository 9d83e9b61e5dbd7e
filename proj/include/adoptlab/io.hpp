#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "adoptlab/dynamics.hpp"
#include "adoptlab/model.hpp"

namespace adoptlab {

/// Shortest decimal representation that round-trips the exact double, so
/// CSV diffs are stable across platforms and reruns.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::ostream& csv_field(std::ostream& os, double v) {
  return os << format_double(v);
}

/// Trajectory CSV: t,xG,xP,xR,e,c,alpha,phase. phase is 1 while the cost
/// decay indicator is on.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr,
                                 const ModelParams& p) {
  os << "t,xG,xP,xR,e,c,alpha,phase\n";
  for (size_t i = 0; i < tr.samples.size(); ++i) {
    const FullState& s = tr.samples[i];
    int phase = i < tr.phases.size() ? tr.phases[i] : 0;
    os << format_double(s.t) << ',' << format_double(s.x.xG) << ','
       << format_double(s.x.xP) << ',' << format_double(s.x.xR) << ','
       << format_double(effective_adoption(s.x, p.gamma)) << ','
       << format_double(s.c) << ',' << format_double(s.alphaBelief) << ','
       << phase << '\n';
  }
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open for writing: " + path);
  f << content;
}

} // namespace adoptlab
