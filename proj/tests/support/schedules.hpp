#pragma once

#include <string>
#include <vector>

#include "sfq/cells.hpp"

namespace support {

// One symbol per slot, slots `period_ps` apart starting at one period.
inline std::vector<sfq::PulseEvent> schedule_from(const std::string& symbols, double period_ps = 100.0) {
  std::vector<sfq::PulseEvent> s;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const char* port = symbols[k] == 's' ? "set" : symbols[k] == 'r' ? "rst" : "clk";
    s.push_back({sfq::SimTime::from_ps(period_ps * static_cast<double>(k + 1)), port});
  }
  return s;
}

inline std::vector<sfq::SimTime> output_times(const std::vector<sfq::PulseEvent>& events,
                                              const std::string& port = "out") {
  std::vector<sfq::SimTime> t;
  for (const auto& e : events)
    if (e.port == port) t.push_back(e.time);
  return t;
}

}  // namespace support
