#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfq/cells.hpp"
#include "sfq/sim_time.hpp"

namespace sfq {

enum class OracleKind { NDRO, MNDRO_RESET, MNDRO_DECREMENT };
enum class Symbol { SET, RST, CLK };

std::string_view to_string(OracleKind kind);
/// Accepts "ndro", "mndro-rst"/"mndro_reset", "mndro-dec"/"mndro_decrement".
std::optional<OracleKind> oracle_kind_from(std::string_view name);
std::string_view to_string(Symbol s);

/// Reference state machine. NDRO uses states 0 (RESET) and 1 (SET); the
/// M-NDRO kinds use S0..S3.
struct OracleMachine {
  OracleKind kind = OracleKind::NDRO;
  int state = 0;

  int max_state() const { return kind == OracleKind::NDRO ? 1 : 3; }
  std::string state_name() const;
};

struct OracleEventOutcome {
  int newState = 0;
  int outputPulseCount = 0;
};

OracleEventOutcome oracle_step(OracleMachine& machine, Symbol input);

struct ClockExpectation {
  std::size_t index = 0;  // position of the CLK in the symbol sequence
  int count = 0;
};

std::vector<ClockExpectation> run_oracle(OracleKind kind, const std::vector<Symbol>& symbols);

/// Orders set/rst/clk pulses by time (SET before RST before CLK on ties).
struct SymbolSchedule {
  std::vector<Symbol> symbols;
  std::vector<SimTime> clockTimes;
};
SymbolSchedule symbols_from_schedule(const std::vector<PulseEvent>& events);

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Verdict {
  bool pass = true;
  long clock = -1;  // clock index of the first divergence; -1 for pulses before the first clock
  int expected = 0;
  int observed = 0;
};

std::string to_string(const Verdict& v);

inline constexpr SimTime kDefaultCompareWindow = SimTime::from_fs(50000);

/// Groups observed pulses into [clk, clk + window) and compares counts. Pulses
/// outside every window count against the preceding clock.
Verdict compare_trace(const std::vector<ClockExpectation>& expected, const std::vector<SimTime>& observed,
                      const std::vector<SimTime>& clockTimes, SimTime window = kDefaultCompareWindow);

}  // namespace sfq
