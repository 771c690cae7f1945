#include "otb/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "otb/error.hpp"

namespace otb {

void append_real(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "inf" : "-inf";
    return;
  }
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

std::string format_real(double v) {
  std::string s;
  append_real(s, v);
  return s;
}

double parse_real(std::string_view text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::string_view t = text;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(ErrorKind::parse, "not a number: '" + std::string(text) + "'");
  return v;
}

double round_significant(double v, int digits) {
  if (digits <= 0 || !std::isfinite(v)) return v;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  double out = 0.0;
  std::from_chars(buf, end, out);
  return out;
}

}  // namespace otb
