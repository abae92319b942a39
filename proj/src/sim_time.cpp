#include "sfq/sim_time.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace sfq {

std::string format_ps(SimTime t) {
  const std::int64_t fs = t.fs();
  const std::int64_t mag = fs < 0 ? -fs : fs;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", fs < 0 ? "-" : "", static_cast<long long>(mag / 1000),
                static_cast<long long>(mag % 1000));
  return buf;
}

std::string format_ps(double seconds) { return format_ps(SimTime::from_seconds(seconds)); }

SimTime parse_ps(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  std::int64_t whole = 0;
  bool digits = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    whole = whole * 10 + (text[i] - '0');
    digits = true;
  }
  std::int64_t frac = 0;
  int places = 0;
  if (i < text.size() && text[i] == '.') {
    for (++i; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      if (places < 3) {
        frac = frac * 10 + (text[i] - '0');
        ++places;
      } else if (text[i] != '0') {
        throw std::invalid_argument("time '" + text + "' is finer than 1 fs");
      }
      digits = true;
    }
  }
  if (!digits || i != text.size()) throw std::invalid_argument("malformed time '" + text + "'");
  while (places < 3) {
    frac *= 10;
    ++places;
  }
  const std::int64_t fs = whole * 1000 + frac;
  return SimTime(negative ? -fs : fs);
}

}  // namespace sfq
