#include <doctest.h>

#include <random>

#include "sfq/oracle.hpp"
#include "support/reference.hpp"
#include "support/schedules.hpp"

using namespace sfq;

namespace {

std::vector<Symbol> to_symbols(const std::string& s) {
  std::vector<Symbol> out;
  for (char c : s) out.push_back(c == 's' ? Symbol::SET : c == 'r' ? Symbol::RST : Symbol::CLK);
  return out;
}

std::vector<int> counts(const std::vector<ClockExpectation>& e) {
  std::vector<int> out;
  for (const auto& x : e) out.push_back(x.count);
  return out;
}

SimTime ps(double v) { return SimTime::from_ps(v); }

}  // namespace

TEST_CASE("single steps") {
  OracleMachine ndro{OracleKind::NDRO, 1};
  const auto a = oracle_step(ndro, Symbol::CLK);
  CHECK(a.newState == 1);
  CHECK(a.outputPulseCount == 1);

  OracleMachine rst{OracleKind::MNDRO_RESET, 2};
  const auto b = oracle_step(rst, Symbol::CLK);
  CHECK(b.newState == 2);
  CHECK(b.outputPulseCount == 2);
  CHECK(rst.state_name() == "S2");

  OracleMachine dec{OracleKind::MNDRO_DECREMENT, 0};
  const auto c = oracle_step(dec, Symbol::RST);
  CHECK(c.newState == 0);
  CHECK(c.outputPulseCount == 0);

  OracleMachine n0{OracleKind::NDRO, 0};
  CHECK(n0.state_name() == "RESET");
  oracle_step(n0, Symbol::SET);
  CHECK(n0.state_name() == "SET");
}

TEST_CASE("folded sequences") {
  CHECK(counts(run_oracle(OracleKind::NDRO, to_symbols("scrc"))) == std::vector<int>{1, 0});
  CHECK(run_oracle(OracleKind::NDRO, {}).empty());
  CHECK(counts(run_oracle(OracleKind::MNDRO_RESET, to_symbols("ssssc"))) == std::vector<int>{3});
  CHECK(counts(run_oracle(OracleKind::MNDRO_DECREMENT, to_symbols("ssssc"))) == std::vector<int>{3});
  const auto e = run_oracle(OracleKind::NDRO, to_symbols("scrc"));
  CHECK(e[0].index == 1);
  CHECK(e[1].index == 3);
}

TEST_CASE("agrees with the reference machines") {
  std::mt19937_64 rng(21);
  const OracleKind kinds[] = {OracleKind::NDRO, OracleKind::MNDRO_RESET, OracleKind::MNDRO_DECREMENT};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto syms = ref::random_symbols(rng, 30);
    for (int v = 0; v < 3; ++v) CHECK(counts(run_oracle(kinds[v], to_symbols(syms))) == ref::expected_counts(v, syms));
  }
}

TEST_CASE("clock never changes state") {
  for (auto kind : {OracleKind::NDRO, OracleKind::MNDRO_RESET, OracleKind::MNDRO_DECREMENT}) {
    OracleMachine m{kind, 0};
    for (int s = 0; s <= m.max_state(); ++s) {
      m.state = s;
      CHECK(oracle_step(m, Symbol::CLK).newState == s);
      CHECK(m.state == s);
      OracleMachine x{kind, s};
      CHECK(oracle_step(x, Symbol::SET).outputPulseCount == 0);
      CHECK(oracle_step(x, Symbol::RST).outputPulseCount == 0);
    }
  }
}

TEST_CASE("the two M-NDRO variants agree until a reset above S1") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto syms = ref::random_symbols(rng, 20);
    OracleMachine a{OracleKind::MNDRO_RESET, 0}, b{OracleKind::MNDRO_DECREMENT, 0};
    for (char c : syms) {
      if (c == 'r' && a.state > 1) break;
      const auto sym = to_symbols(std::string(1, c))[0];
      CHECK(oracle_step(a, sym).outputPulseCount == oracle_step(b, sym).outputPulseCount);
      CHECK(a.state == b.state);
    }
  }
}

TEST_CASE("schedule to symbols") {
  const auto s = symbols_from_schedule({{ps(100), "clk"}, {ps(100), "set"}, {ps(40), "rst"}, {ps(300), "clk"}});
  REQUIRE(s.symbols.size() == 4);
  CHECK(s.symbols[0] == Symbol::RST);
  CHECK(s.symbols[1] == Symbol::SET);
  CHECK(s.symbols[2] == Symbol::CLK);
  CHECK(s.clockTimes == std::vector<SimTime>{ps(100), ps(300)});
}

TEST_CASE("trace comparison") {
  const std::vector<ClockExpectation> exp{{1, 1}, {3, 0}, {5, 2}};
  const std::vector<SimTime> clocks{ps(100), ps(200), ps(300)};
  SUBCASE("match") {
    const auto v = compare_trace(exp, {ps(107.5), ps(307.5), ps(311.5)}, clocks);
    CHECK(v.pass);
    CHECK(to_string(v) == "PASS");
  }
  SUBCASE("missing pulse") {
    const auto v = compare_trace(exp, {ps(107.5), ps(307.5)}, clocks);
    CHECK_FALSE(v.pass);
    CHECK(v.clock == 2);
    CHECK(to_string(v) == "FAIL clk=2 expected=2 observed=1");
  }
  SUBCASE("pulse before any clock") {
    const auto v = compare_trace(exp, {ps(50), ps(107.5), ps(307.5), ps(311.5)}, clocks);
    CHECK_FALSE(v.pass);
    CHECK(v.clock == -1);
  }
  SUBCASE("stray pulse between windows") {
    const auto v = compare_trace(exp, {ps(107.5), ps(170), ps(307.5), ps(311.5)}, clocks);
    CHECK_FALSE(v.pass);
    CHECK(v.clock == 0);
  }
  SUBCASE("overlapping windows") {
    CHECK_THROWS_AS(compare_trace(exp, {}, {ps(100), ps(130), ps(300)}), ConfigError);
  }
}

TEST_CASE("behavioral NDRO matches the oracle on random schedules") {
  std::mt19937_64 rng(99);
  const auto c = build_ndro();
  for (int trial = 0; trial < 300; ++trial) {
    const auto syms = ref::random_symbols(rng, 20);
    const auto sched = support::schedule_from(syms);
    const auto ss = symbols_from_schedule(sched);
    const auto r = simulate(c, sched, ps(100.0 * 22));
    const auto v = compare_trace(run_oracle(OracleKind::NDRO, ss.symbols), support::output_times(r.outputs),
                                 ss.clockTimes);
    CHECK_MESSAGE(v.pass, syms << ": " << to_string(v));
  }
}
