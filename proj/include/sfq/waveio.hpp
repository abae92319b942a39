#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfq/analog.hpp"
#include "sfq/cells.hpp"
#include "sfq/margin.hpp"
#include "sfq/netlist.hpp"

namespace sfq {

class FormatError : public std::runtime_error {
public:
  FormatError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

struct PulseSchedule {
  std::vector<std::string> declaredPorts;
  std::vector<PulseEvent> events;  // sorted by time, stable for equal times
};

/// "port <name>" declarations, then "pulse <port> <time_ps>"; '#' comments.
PulseSchedule read_schedule(std::string_view text);
std::string write_schedule(const PulseSchedule& schedule);

/// Event trace: one "pulse <port> <time_ps>" line per event, sorted by time.
std::string write_events(const std::vector<PulseEvent>& events);
std::vector<PulseEvent> read_events(std::string_view text);
std::string write_events(const std::vector<PhaseSlipEvent>& events);

std::string write_trace(const std::vector<TraceEntry>& trace);

/// CSV with header "time_ps,v(<node>)...,phase(<B>)...". With an empty probe
/// list every node voltage and every junction phase is written. Rows before
/// `start` (seconds) are skipped.
std::string write_waveform_csv(const Waveform& wf, const std::vector<Probe>& probes = {}, double start = 0.0);

/// Value-change dump at 1 fs resolution; each pulse is a one-step high pulse
/// on a wire named after its port or junction.
std::string write_vcd(const std::vector<PulseEvent>& events);
std::string write_vcd(const std::vector<PhaseSlipEvent>& events);

std::string write_margin_csv(const MarginReport& report);

std::string read_text_file(const std::string& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace sfq
