#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfq/cells.hpp"
#include "sfq/netlist.hpp"
#include "sfq/oracle.hpp"

namespace sfq {

struct MarginParameter {
  std::string name;
  double nominal = 1.0;
};

/// Maps absolute parameter values (same order as MarginSpec::parameters) to pass/fail.
/// Must be reentrant: the sweep may call it from several threads at once.
using PassFn = std::function<bool(const std::vector<double>& values)>;

struct MarginSpec {
  std::vector<MarginParameter> parameters;
  double lowBound = 0.2;
  double highBound = 3.0;
  double resolution = 0.005;
  PassFn pass;
  int threads = 0;         // 0: hardware concurrency, 1: serial
  int islandSamples = 16;  // equispaced probes across the bounds
};

struct ParameterMargin {
  std::string name;
  double low = 1.0;
  double high = 1.0;
  bool lowSaturated = false;   // passes all the way down to the search bound
  bool highSaturated = false;
  bool island = false;         // a probe outside [low, high] passed, or one inside failed

  double margin_percent() const;
};

struct MarginReport {
  std::vector<ParameterMargin> perParameter;
  std::string criticalParameter;
  double criticalMarginPercent = 0.0;
  bool unbounded = false;  // the critical side hit a search bound: the true margin is at least this
};

class MarginError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

MarginReport margin_sweep(const MarginSpec& spec);

struct CriticalMargin {
  std::string parameter;
  double percent = 0.0;
  bool unbounded = false;
};
CriticalMargin critical_margin(const MarginReport& report);

std::string render_table(const MarginReport& report);

/// Pass function for a behavioral circuit: builds the circuit from scaled
/// timings, simulates every schedule and compares against the oracle.
struct BehavioralTarget {
  std::function<BehavioralCircuit(const CellTimings&)> build;
  CellTimings nominal;
  OracleKind kind = OracleKind::NDRO;
  std::vector<std::vector<PulseEvent>> schedules;
  SimTime window = kDefaultCompareWindow;
  std::vector<std::string> keys;  // timing keys to sweep; empty = all applicable
};
MarginSpec behavioral_margin_spec(const BehavioralTarget& target);
bool behavioral_passes(const BehavioralTarget& target, const CellTimings& timings);

/// Pass function for an analog netlist: each junction critical current and
/// each inductance is a parameter; a run passes when every watched junction
/// shows the same number of phase slips as the nominal run.
struct AnalogTarget {
  FlatNetlist netlist;
  std::vector<std::string> watch;
  double dt = 0.0;     // 0: netlist default
  double tstop = 0.0;  // 0: netlist default
  std::vector<std::string> only;  // restrict to these element names
};
MarginSpec analog_margin_spec(const AnalogTarget& target);

}  // namespace sfq
