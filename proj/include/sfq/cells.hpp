#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfq/sim_time.hpp"

namespace sfq {

/// Invalid circuit composition: bad port, fan-out violation, zero-delay cycle,
/// or timings that break the feedback reload ordering.
class CompositionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad schedule handed to the event simulator (unknown port, negative time).
class ScheduleError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-cell delays. Defaults: JTL/SPL/CBU from the wiring-cell table, memory
/// clock-to-output 5 ps, MCG/RG replica spacing 4 ps, CBU merge window 2 ps.
struct CellTimings {
  SimTime jtlDelay = SimTime::from_fs(3000);
  SimTime splDelay = SimTime::from_fs(2500);
  SimTime cbuDelay = SimTime::from_fs(5000);
  SimTime memDelay = SimTime::from_fs(5000);
  SimTime mcgSpacing = SimTime::from_fs(4000);
  SimTime cbuDeadTime = SimTime::from_fs(2000);

  /// Delay of the reload path (SPL, JTL, CBU) from memory output back to its set input.
  SimTime reload_latency() const { return splDelay + jtlDelay + cbuDelay; }
  /// Sets a field by key ("jtl", "spl", "cbu", "mem", "mcg", "cbu_dead"); value in ps.
  void set(std::string_view key, double ps);
  std::map<std::string, double> as_ps() const;
  void validate() const;
};

enum class CellKind { JTL, SPL, CBU, DFF, MemoryUnit, MCG, RG };

std::string_view to_string(CellKind kind);
std::optional<CellKind> cell_kind_from(std::string_view name);
const std::vector<std::string>& input_ports(CellKind kind);
const std::vector<std::string>& output_ports(CellKind kind);

struct CellInstance {
  std::string name;
  CellKind kind = CellKind::JTL;
  int param = 1;  // capacity for memory units, replica count for MCG/RG
  int state = 0;  // stored fluxons, stateful kinds only

  int jj_count() const;
  bool stateful() const { return kind == CellKind::MemoryUnit || kind == CellKind::DFF; }
};

struct PortRef {
  std::size_t cell = 0;
  std::string port;
  auto operator<=>(const PortRef&) const = default;
};

struct Net {
  PortRef from;  // output port
  PortRef to;    // input port
};

class BehavioralCircuit {
public:
  CellTimings timings;

  std::size_t add_cell(std::string name, CellKind kind, int param = 1);
  void connect(std::string_view fromCell, std::string_view outPort, std::string_view toCell,
               std::string_view inPort);
  void add_input(std::string name, std::string_view cell, std::string_view port);
  void add_output(std::string name, std::string_view cell, std::string_view port);

  const std::vector<CellInstance>& cells() const { return cells_; }
  std::vector<CellInstance>& cells() { return cells_; }
  const std::vector<Net>& nets() const { return nets_; }
  const std::map<std::string, PortRef>& inputs() const { return inputs_; }
  const std::map<PortRef, std::string>& outputs() const { return outputs_; }

  std::optional<std::size_t> find_cell(std::string_view name) const;
  const CellInstance& cell(std::string_view name) const;
  const Net* net_from(const PortRef& out) const;
  /// In-to-out delay of one cell for the current timings (first replica for MCG/RG).
  SimTime cell_delay(const CellInstance& c) const;

  /// Checks timings and rejects zero-delay cycles. Port names and fan-out are
  /// enforced as nets are added.
  void validate() const;

private:
  PortRef resolve(std::string_view cell, std::string_view port, bool output) const;

  std::vector<CellInstance> cells_;
  std::vector<Net> nets_;
  std::map<std::string, PortRef> inputs_;
  std::map<PortRef, std::string> outputs_;
};

/// One-bit NDRO: RDFF memory with an SPL -> JTL -> CBU reload loop.
BehavioralCircuit build_ndro(const CellTimings& timings = {});
/// Three-fluxon M-NDRO. With the reset generator RST clears every fluxon;
/// without it each RST removes one (up/down counter).
BehavioralCircuit build_mndro(bool withRG, const CellTimings& timings = {});

int behavioral_jj_count(const BehavioralCircuit& circuit);

struct FeedbackPath {
  std::vector<std::string> cells;  // from the memory output to its set input
  SimTime delay;
  int jjCount = 0;
};
FeedbackPath feedback_path(const BehavioralCircuit& circuit, std::string_view memoryCell = "mem");

struct PulseEvent {
  SimTime time;
  std::string port;
  auto operator<=>(const PulseEvent&) const = default;
};

struct TraceEntry {
  SimTime time;
  std::string cell;
  std::string what;  // "in set", "out out", "state 1->2", "merge in1", "absorb clk"
};

struct SimOptions {
  bool trace = false;
  SimTime settlingWindow = SimTime::from_fs(20000);
};

struct SimResult {
  std::vector<PulseEvent> outputs;  // external outputs, sorted by time
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;  // settling-window violations, CBU merges
  std::map<std::string, int> finalStates;
};

/// Discrete-event simulation. Input pulses at equal times are injected in port
/// order set, rst, clk, then alphabetical.
SimResult simulate(const BehavioralCircuit& circuit, const std::vector<PulseEvent>& schedule, SimTime tstop,
                   const SimOptions& options = {});

/// Text form: "cell <name> <kind> [param]", "net <c>.<p> <c>.<p>",
/// "input <name> <c>.<p>", "output <name> <c>.<p>", "timing <key> <ps>".
BehavioralCircuit parse_circuit(std::string_view text);
std::string to_text(const BehavioralCircuit& circuit);

}  // namespace sfq
