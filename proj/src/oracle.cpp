#include "sfq/oracle.hpp"

#include <algorithm>

namespace sfq {

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::NDRO: return "ndro";
    case OracleKind::MNDRO_RESET: return "mndro-rst";
    case OracleKind::MNDRO_DECREMENT: return "mndro-dec";
  }
  return "?";
}

std::optional<OracleKind> oracle_kind_from(std::string_view name) {
  if (name == "ndro") return OracleKind::NDRO;
  if (name == "mndro-rst" || name == "mndro_reset") return OracleKind::MNDRO_RESET;
  if (name == "mndro-dec" || name == "mndro_decrement") return OracleKind::MNDRO_DECREMENT;
  return std::nullopt;
}

std::string_view to_string(Symbol s) {
  switch (s) {
    case Symbol::SET: return "set";
    case Symbol::RST: return "rst";
    case Symbol::CLK: return "clk";
  }
  return "?";
}

std::string OracleMachine::state_name() const {
  if (kind == OracleKind::NDRO) return state ? "SET" : "RESET";
  return "S" + std::to_string(state);
}

OracleEventOutcome oracle_step(OracleMachine& m, Symbol input) {
  int pulses = 0;
  switch (input) {
    case Symbol::SET:
      m.state = std::min(m.state + 1, m.max_state());
      break;
    case Symbol::RST:
      m.state = m.kind == OracleKind::MNDRO_DECREMENT ? std::max(m.state - 1, 0) : 0;
      break;
    case Symbol::CLK:
      pulses = m.state;
      break;
  }
  return {m.state, pulses};
}

std::vector<ClockExpectation> run_oracle(OracleKind kind, const std::vector<Symbol>& symbols) {
  OracleMachine m{kind, 0};
  std::vector<ClockExpectation> out;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const auto r = oracle_step(m, symbols[k]);
    if (symbols[k] == Symbol::CLK) out.push_back({k, r.outputPulseCount});
  }
  return out;
}

SymbolSchedule symbols_from_schedule(const std::vector<PulseEvent>& events) {
  struct Keyed {
    SimTime time;
    Symbol sym;
  };
  std::vector<Keyed> keyed;
  for (const auto& e : events) {
    if (e.port == "set") keyed.push_back({e.time, Symbol::SET});
    else if (e.port == "rst") keyed.push_back({e.time, Symbol::RST});
    else if (e.port == "clk") keyed.push_back({e.time, Symbol::CLK});
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.time != b.time ? a.time < b.time : static_cast<int>(a.sym) < static_cast<int>(b.sym);
  });
  SymbolSchedule out;
  for (const auto& k : keyed) {
    out.symbols.push_back(k.sym);
    if (k.sym == Symbol::CLK) out.clockTimes.push_back(k.time);
  }
  return out;
}

std::string to_string(const Verdict& v) {
  if (v.pass) return "PASS";
  return "FAIL clk=" + std::to_string(v.clock) + " expected=" + std::to_string(v.expected) +
         " observed=" + std::to_string(v.observed);
}

Verdict compare_trace(const std::vector<ClockExpectation>& expected, const std::vector<SimTime>& observed,
                      const std::vector<SimTime>& clockTimes, SimTime window) {
  if (expected.size() != clockTimes.size())
    throw ConfigError("expected counts for " + std::to_string(expected.size()) + " clocks but " +
                      std::to_string(clockTimes.size()) + " clock times given");
  if (!(window > SimTime{})) throw ConfigError("compare window must be positive");
  for (std::size_t k = 1; k < clockTimes.size(); ++k) {
    if (clockTimes[k] < clockTimes[k - 1]) throw ConfigError("clock times must be sorted");
    if (clockTimes[k] - clockTimes[k - 1] < window)
      throw ConfigError("clock period " + format_ps(clockTimes[k] - clockTimes[k - 1]) + " ps is shorter than the " +
                        format_ps(window) + " ps compare window");
  }

  std::vector<int> counts(clockTimes.size(), 0);
  std::vector<int> stray(clockTimes.size(), 0);
  int early = 0;
  for (const auto t : observed) {
    auto it = std::upper_bound(clockTimes.begin(), clockTimes.end(), t);
    if (it == clockTimes.begin()) {
      ++early;
      continue;
    }
    const auto k = static_cast<std::size_t>(it - clockTimes.begin()) - 1;
    ++(t - clockTimes[k] < window ? counts[k] : stray[k]);
  }
  if (early > 0) return {false, -1, 0, early};
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] != expected[k].count || stray[k] > 0)
      return {false, static_cast<long>(k), expected[k].count, counts[k] + stray[k]};
  return {};
}

}  // namespace sfq
