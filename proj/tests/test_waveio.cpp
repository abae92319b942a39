#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "sfq/waveio.hpp"
#include "test_paths.hpp"

using namespace sfq;

namespace {

SimTime ps(double v) { return SimTime::from_ps(v); }

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("picosecond formatting") {
  CHECK(format_ps(ps(127.5)) == "127.500");
  CHECK(format_ps(SimTime::from_fs(1)) == "0.001");
  CHECK(format_ps(SimTime{}) == "0.000");
  CHECK(parse_ps("127.5") == ps(127.5));
  CHECK(parse_ps("0.0010") == SimTime::from_fs(1));
  CHECK_THROWS_AS(parse_ps("0.0005"), std::invalid_argument);
  CHECK_THROWS_AS(parse_ps("x1"), std::invalid_argument);
}

TEST_CASE("schedule parsing") {
  SUBCASE("single event") {
    const auto s = read_schedule("port clk\npulse clk 100\n");
    REQUIRE(s.events.size() == 1);
    CHECK(s.events[0].time == ps(100));
    CHECK(s.events[0].port == "clk");
  }
  SUBCASE("undeclared port") {
    try {
      read_schedule("port clk\npulse set 10\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("malformed time") { CHECK_THROWS_AS(read_schedule("port clk\npulse clk ten\n"), FormatError); }
  SUBCASE("negative time") { CHECK_THROWS_AS(read_schedule("port clk\npulse clk -3\n"), FormatError); }
  SUBCASE("unknown directive") { CHECK_THROWS_AS(read_schedule("clock 5\n"), FormatError); }
  SUBCASE("events are sorted") {
    const auto s = read_schedule("port a\nport b\npulse b 30 # late\npulse a 10\n");
    CHECK(s.events[0].port == "a");
    CHECK(s.events[1].port == "b");
  }
  SUBCASE("shipped readout scenario") {
    const auto s = read_schedule(read_text_file(schedule_path("ndro_readout.sched")));
    CHECK(s.events.size() == 10);
    CHECK(s.declaredPorts == std::vector<std::string>{"set", "rst", "clk"});
    CHECK(read_schedule(write_schedule(s)).events == s.events);
  }
}

TEST_CASE("event traces") {
  CHECK(write_events(std::vector<PulseEvent>{}).empty());
  CHECK(write_events(std::vector<PulseEvent>{{ps(127.5), "out"}}) == "pulse out 127.500\n");

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> fs(0, 5'000'000);
  std::uniform_int_distribution<int> port(0, 2);
  const char* names[] = {"out", "q", "B3"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PulseEvent> ev;
    for (int k = 0; k < 30; ++k) ev.push_back({SimTime::from_fs(fs(rng)), names[port(rng)]});
    const auto text = write_events(ev);
    const auto back = read_events(text);
    CHECK(write_events(back) == text);
    CHECK(back.size() == ev.size());
    for (std::size_t k = 1; k < back.size(); ++k) CHECK(back[k - 1].time <= back[k].time);
  }

  const std::vector<PhaseSlipEvent> slips{{"B5", 107.758e-12, 0}, {"B1", 102.276e-12, 0}};
  CHECK(write_events(slips) == "pulse B1 102.276\npulse B5 107.758\n");
}

TEST_CASE("waveform csv") {
  Waveform wf;
  wf.times = {0.0, 0.1e-12, 0.2e-12};
  wf.nodes = {"1", "2"};
  wf.junctions = {"B1"};
  wf.junctionTerminals = {{0, -1}};
  wf.voltages = {{0.0, 0.0}, {1e-4, 2e-4}, {3e-4, 4e-4}};
  wf.phases = {{0.0}, {0.5}, {1.0}};
  wf.currents = {{}, {}, {}};
  const auto all = write_waveform_csv(wf);
  std::istringstream in(all);
  std::string header;
  std::getline(in, header);
  CHECK(header == "time_ps,v(1),v(2),phase(B1)");
  CHECK(count_lines(all) == 4);
  const auto two = write_waveform_csv(wf, {{Probe::Kind::NodeVoltage, "2"}, {Probe::Kind::JunctionPhase, "B1"}});
  CHECK(two.substr(0, two.find('\n')) == "time_ps,v(2),phase(B1)");
  CHECK(two.find("0.100,0.0002,0.5\n") != std::string::npos);
  CHECK_THROWS_AS(write_waveform_csv(wf, {{Probe::Kind::NodeVoltage, "9"}}), std::invalid_argument);

  Waveform empty;
  empty.nodes = {"1"};
  CHECK(write_waveform_csv(empty) == "time_ps,v(1)\n");
}

TEST_CASE("vcd output") {
  const auto vcd = write_vcd(std::vector<PulseEvent>{{ps(10), "out"}, {ps(20), "out"}});
  CHECK(vcd.find("$timescale 1fs $end") != std::string::npos);
  CHECK(vcd.find("#10000\n1!") != std::string::npos);
  CHECK(vcd.find("#10001\n0!") != std::string::npos);
  const auto slips = write_vcd(std::vector<PhaseSlipEvent>{{"B1", 5e-12, 0}});
  CHECK(slips.find("B1") != std::string::npos);
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "sfqsim_waveio_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  write_text_file_atomic(path, "first\n");
  write_text_file_atomic(path, "second\n");
  CHECK(read_text_file(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(read_text_file((dir / "missing.txt").string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}
