#ifndef LEGIBOT_NUMFMT_HPP
#define LEGIBOT_NUMFMT_HPP

#include <charconv>
#include <cstdio>
#include <string>

namespace legibot {

/// Shortest decimal representation that round-trips the exact double value.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Fixed-precision formatting for layout coordinates (SVG, charts).
inline std::string fmt_fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0" || s == "-0.0" || s == "-0.00" || s == "-0.000") s.erase(0, 1);
  return s;
}

}  // namespace legibot

#endif  // LEGIBOT_NUMFMT_HPP
