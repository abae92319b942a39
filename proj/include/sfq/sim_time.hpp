#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace sfq {

/// Simulation time with 1 fs granularity. The behavioral engine does all of
/// its arithmetic in integer femtoseconds so that delay sums are exact.
class SimTime {
public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t fs) : fs_(fs) {}

  static constexpr SimTime from_fs(std::int64_t fs) { return SimTime(fs); }
  static SimTime from_ps(double ps) {
    return SimTime(static_cast<std::int64_t>(std::llround(ps * 1000.0)));
  }
  static SimTime from_seconds(double s) {
    return SimTime(static_cast<std::int64_t>(std::llround(s * 1e15)));
  }

  constexpr std::int64_t fs() const { return fs_; }
  constexpr double ps() const { return static_cast<double>(fs_) / 1000.0; }
  constexpr double seconds() const { return static_cast<double>(fs_) * 1e-15; }

  constexpr SimTime operator+(SimTime o) const { return SimTime(fs_ + o.fs_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(fs_ - o.fs_); }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime(fs_ * k); }
  constexpr SimTime& operator+=(SimTime o) {
    fs_ += o.fs_;
    return *this;
  }
  constexpr auto operator<=>(const SimTime&) const = default;

private:
  std::int64_t fs_ = 0;
};

/// Fixed-point picoseconds with three decimals, e.g. "127.500".
std::string format_ps(SimTime t);
std::string format_ps(double seconds);

/// Parses a picosecond literal with at most three decimals into exact fs.
/// Throws std::invalid_argument on malformed input.
SimTime parse_ps(const std::string& text);

}  // namespace sfq
