#pragma once

#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sfq/netlist.hpp"

namespace sfq {

inline constexpr double kFluxQuantum = 2.067833848e-15;                     // Wb, h/2e
inline constexpr double kReducedFluxQuantum = kFluxQuantum / (2.0 * std::numbers::pi);

/// Newton iteration failed even after the step was halved down to dt/64.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(double time, const std::string& what) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

private:
  double time_;
};

/// The circuit equations cannot be solved at all (floating nodes, singular matrix).
class StructuralError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransientConfig {
  std::optional<double> dt;     // s; defaults to the .tran step, then 0.1 ps
  std::optional<double> tstop;  // s; defaults to the .tran stop
  double newtonAbsTolV = 1e-6;
  double newtonAbsTolI = 1e-9;
  int maxNewtonIters = 50;
  double pulseDetectThreshold = std::numbers::pi;  // first crossing level; later levels add 2*pi*k
};

inline constexpr double kDefaultStep = 0.1e-12;

struct PhaseSlipEvent {
  std::string junction;
  double time = 0.0;  // s, interpolated crossing instant
  int index = 0;      // prior slips on the same junction
};

struct CircuitState {
  double time = 0.0;
  std::map<std::string, double> nodeVoltages;       // ground omitted, always 0
  std::map<std::string, double> junctionPhases;     // unwrapped
  std::map<std::string, double> inductorCurrents;
};

/// Sampled transient result. Every row holds all node voltages, junction
/// phases and inductor currents at one output time.
class Waveform {
public:
  std::vector<double> times;
  std::vector<std::string> nodes;
  std::vector<std::string> junctions;
  std::vector<std::string> inductors;
  std::vector<std::pair<int, int>> junctionTerminals;  // node indices, -1 is ground
  std::vector<std::vector<double>> voltages;  // [sample][node]
  std::vector<std::vector<double>> phases;    // [sample][junction]
  std::vector<std::vector<double>> currents;  // [sample][inductor]

  std::size_t size() const { return times.size(); }
  int node_index(const std::string& node) const;
  int junction_index(const std::string& name) const;
  int inductor_index(const std::string& name) const;
  double node_voltage(std::size_t sample, int node) const;
  double junction_voltage(std::size_t sample, int junction) const;
  CircuitState state_at(std::size_t sample) const;
};

struct TransientResult {
  Waveform waveform;
  std::vector<PhaseSlipEvent> events;  // sorted by time
  int halvedSteps = 0;
};

TransientResult run_transient(const FlatNetlist& flat, const TransientConfig& cfg = {});

/// Trapezoidal integral of a junction's voltage over [t1, t2].
double pulse_area(const Waveform& wf, const std::string& junction, double t1, double t2);

struct LoopBranch {
  std::string element;  // inductor or junction
  int orientation = 1;  // +1 traverses n+ -> n-, -1 the reverse
};
using FluxoidLoop = std::vector<LoopBranch>;

/// Throws std::invalid_argument when the path does not close on itself or names
/// something other than an inductor or junction.
void validate_loop(const FlatNetlist& flat, const FluxoidLoop& loop);

/// Un-rounded fluxoid of the loop in units of the flux quantum. Junction phases
/// enter with their principal value, so the result is integral whenever KVL holds.
double fluxoid(const FlatNetlist& flat, const CircuitState& state, const FluxoidLoop& loop);
long count_fluxons(const FlatNetlist& flat, const CircuitState& state, const FluxoidLoop& loop);

/// First sample index at or after `from` that starts a run of `run` samples with
/// every |node voltage| below `vmax`.
std::optional<std::size_t> find_quiescent(const Waveform& wf, double from, double vmax = 0.1e-6,
                                          std::size_t run = 5);

/// ic * L in units of the flux quantum.
double storage_capacity(double loopInductance, double ic);

std::vector<PhaseSlipEvent> events_on(const std::vector<PhaseSlipEvent>& events, const std::string& junction);

}  // namespace sfq
