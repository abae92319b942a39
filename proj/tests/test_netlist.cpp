#include <doctest.h>

#include <cstdlib>
#include <random>
#include <string>

#include "sfq/netlist.hpp"
#include "test_paths.hpp"

using namespace sfq;

namespace {

bool same_source(const SourceSpec& a, const SourceSpec& b) {
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<DcSource>(&a)) return x->value == std::get<DcSource>(b).value;
  if (auto* x = std::get_if<PwlSource>(&a)) return x->points == std::get<PwlSource>(b).points;
  const auto& p = std::get<PulseSource>(a);
  const auto& q = std::get<PulseSource>(b);
  return p.t0 == q.t0 && p.amplitude == q.amplitude && p.width == q.width;
}

bool same_element(const Element& a, const Element& b) {
  return a.kind == b.kind && a.name == b.name && a.nplus == b.nplus && a.nminus == b.nminus && a.value == b.value &&
         a.model == b.model && a.area == b.area && same_source(a.source, b.source);
}

void check_equivalent(const Netlist& a, const Netlist& b) {
  REQUIRE(a.elements.size() == b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) CHECK(same_element(a.elements[i], b.elements[i]));
  REQUIRE(a.models.size() == b.models.size());
  for (const auto& [name, m] : a.models) {
    REQUIRE(b.models.contains(name));
    const auto& n = b.models.at(name);
    CHECK(m.icrit == n.icrit);
    CHECK(m.cap == n.cap);
    CHECK(m.rn == n.rn);
    CHECK(m.r0 == n.r0);
  }
  REQUIRE(a.trans.size() == b.trans.size());
  for (std::size_t i = 0; i < a.trans.size(); ++i) {
    CHECK(a.trans[i].step == b.trans[i].step);
    CHECK(a.trans[i].stop == b.trans[i].stop);
    CHECK(a.trans[i].start == b.trans[i].start);
  }
  CHECK(a.probes.size() == b.probes.size());
  CHECK(a.instances.size() == b.instances.size());
  CHECK(a.subcircuits.size() == b.subcircuits.size());
}

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  for (const auto& x : d)
    if (x.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("inductor line with a pico suffix") {
  const auto n = parse_netlist("L1 1 2 2.09p\n");
  REQUIRE(n.elements.size() == 1);
  const auto& e = n.elements[0];
  CHECK(e.kind == ElementKind::Inductor);
  CHECK(e.name == "L1");
  CHECK(e.nplus == "1");
  CHECK(e.nminus == "2");
  CHECK(e.value == 2.09e-12);
}

TEST_CASE("junction picks up its model") {
  const auto n = parse_netlist(".model jmod jj(icrit=170u)\nB1 3 0 jmod\nR1 3 0 4\n");
  const auto flat = flatten(n);
  const Element* b = flat.find("B1");
  REQUIRE(b != nullptr);
  CHECK(b->kind == ElementKind::Junction);
  CHECK(flat.icrit_of(*b) == 170e-6);
  CHECK(flat.model_of(*b).capDefaulted);
  CHECK(flat.model_of(*b).cap == doctest::Approx(119e-15).epsilon(1e-12));
}

TEST_CASE("keys are case-insensitive and gnd maps to ground") {
  const auto n = parse_netlist(".MODEL JX JJ(ICRIT=100U, CAP=50F)\nb1 A GND jx area=2\nr1 a 0 5\n");
  const auto flat = flatten(n);
  const Element* b = flat.find("b1");
  REQUIRE(b != nullptr);
  CHECK(b->nplus == "a");
  CHECK(b->nminus == "0");
  CHECK(flat.icrit_of(*b) == 200e-6);
}

TEST_CASE("parse errors") {
  SUBCASE("empty input") { CHECK_THROWS_WITH_AS(parse_netlist(""), "no elements", ParseError); }
  SUBCASE("comments only") { CHECK_THROWS_AS(parse_netlist("* title\n# nothing\n"), ParseError); }
  SUBCASE("duplicate name") {
    try {
      parse_netlist("R1 1 0 5\nr1 1 0 6\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }
  SUBCASE("unknown model") { CHECK_THROWS_AS(parse_netlist("B1 1 0 nomodel\nR1 1 0 1\n"), ParseError); }
  SUBCASE("non-positive values") {
    CHECK_THROWS_AS(parse_netlist("L1 1 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_netlist("R1 1 0 -3\n"), ParseError);
    CHECK_THROWS_AS(parse_netlist(".model j jj(icrit=0)\nB1 1 0 j\n"), ParseError);
    CHECK_THROWS_AS(parse_netlist(".model j jj(icrit=1u)\nB1 1 0 j area=0\n"), ParseError);
  }
  SUBCASE("pwl times must increase") {
    CHECK_THROWS_AS(parse_netlist("I1 0 1 pwl(0 0 10p 1u 10p 2u)\nR1 1 0 1\n"), ParseError);
  }
  SUBCASE("bad literal reports its line") {
    try {
      parse_netlist("R1 1 0 5\nL2 1 0 abc\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("continuation lines and inline comments") {
  const auto n = parse_netlist("I1 0 1 pwl(0 0\n+ 50p 175u) # ramp\nR1 1 0 2\n.tran 0.1p\n+ 100p\n");
  const auto& src = std::get<PwlSource>(n.elements[0].source);
  REQUIRE(src.points.size() == 2);
  CHECK(src.points[1].first == 50e-12);
  CHECK(src.points[1].second == 175e-6);
  REQUIRE(n.trans.size() == 1);
  CHECK(n.trans[0].stop == 100e-12);
}

TEST_CASE("suffix values are exact decimals") {
  CHECK(*parse_value("2.28p") == 2.28e-12);
  CHECK(*parse_value("7.36p") == 7.36e-12);
  CHECK(*parse_value("158u") == 158e-6);
  CHECK(*parse_value("1meg") == 1e6);
  CHECK(*parse_value("3k") == 3e3);
  CHECK(*parse_value("0.7f") == 0.7e-15);
  CHECK(*parse_value("5.42") == 5.42);
  CHECK(*parse_value("2.86pH") == 2.86e-12);
  CHECK_FALSE(parse_value("p").has_value());
  CHECK_FALSE(parse_value("1.2.3").has_value());

  // Property: "<x><suffix>" equals the decimal literal "<x>e<exp>" for random x.
  std::mt19937_64 rng(7);
  const std::pair<const char*, int> suffixes[] = {{"f", -15}, {"p", -12}, {"n", -9}, {"u", -6},
                                                  {"m", -3},  {"k", 3},   {"meg", 6}};
  std::uniform_int_distribution<int> mant(1, 99999), digits(0, 4), which(0, 6);
  for (int i = 0; i < 2000; ++i) {
    std::string m = std::to_string(mant(rng));
    const int d = digits(rng);
    if (d > 0 && static_cast<int>(m.size()) > d) m.insert(m.size() - static_cast<std::size_t>(d), ".");
    const auto& [suf, exp] = suffixes[which(rng)];
    const std::string literal = m + suf;
    const double expected = std::strtod((m + "e" + std::to_string(exp)).c_str(), nullptr);
    const auto got = parse_value(literal);
    REQUIRE(got.has_value());
    CHECK_MESSAGE(*got == expected, literal);
  }
}

TEST_CASE("to_text round trip") {
  SUBCASE("shipped netlists") {
    for (const char* f : {"jtl5.cir", "mcg.cir", "mndro_loop.cir", "ndro_loop.cir", "jj_single.cir"}) {
      const auto a = read_netlist_file(netlist_path(f));
      const auto b = parse_netlist(to_text(a));
      check_equivalent(a, b);
    }
  }
  SUBCASE("random netlists") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> mant(1, 9999), node(0, 6), kind(0, 3);
    const char* suf[] = {"f", "p", "n", "u", "m", ""};
    std::uniform_int_distribution<int> s(0, 5);
    for (int trial = 0; trial < 100; ++trial) {
      std::string text = ".model jm jj(icrit=" + std::to_string(mant(rng)) + ".5u, cap=" + std::to_string(mant(rng)) +
                         "f, rn=" + std::to_string(mant(rng)) + ")\n";
      for (int i = 0; i < 12; ++i) {
        const std::string a = std::to_string(node(rng) + 1), b = std::to_string(node(rng));
        const std::string v = std::to_string(mant(rng)) + "." + std::to_string(mant(rng)) + suf[s(rng)];
        switch (kind(rng)) {
          case 0: text += "L" + std::to_string(i) + " " + a + " " + b + " " + v + "\n"; break;
          case 1: text += "R" + std::to_string(i) + " " + a + " " + b + " " + v + "\n"; break;
          case 2: text += "B" + std::to_string(i) + " " + a + " " + b + " jm area=" + v + "\n"; break;
          default: text += "I" + std::to_string(i) + " 0 " + a + " pulse(" + v + " " + v + " 3p)\n"; break;
        }
      }
      text += ".tran 0.1p 200p\n";
      const auto n1 = parse_netlist(text);
      const auto n2 = parse_netlist(to_text(n1));
      check_equivalent(n1, n2);
      CHECK(to_text(n2) == to_text(n1));
    }
  }
}

TEST_CASE("flatten") {
  const std::string sub = ".model jm jj(icrit=100u)\n"
                          ".subckt pair a b\n"
                          "B1 a m jm\nB2 m b jm\nR1 m 0 2\n"
                          ".ends\n";
  SUBCASE("no subcircuits is the identity") {
    const auto n = read_netlist_file(netlist_path("jtl5.cir"));
    const auto f = flatten(n);
    REQUIRE(f.elements.size() == n.elements.size());
    for (std::size_t i = 0; i < n.elements.size(); ++i) CHECK(same_element(f.elements[i], n.elements[i]));
  }
  SUBCASE("two instances of a two-junction cell") {
    const auto n = parse_netlist(sub + "X1 1 2 pair\nX2 2 0 pair\nR9 1 0 1\n");
    const auto f = flatten(n);
    int junctions = 0;
    for (const auto& e : f.elements) junctions += e.kind == ElementKind::Junction;
    CHECK(junctions == 4);
    CHECK(f.elements.size() == 7);
    REQUIRE(f.find("X1.B1") != nullptr);
    REQUIRE(f.find("X2.B2") != nullptr);
    CHECK(f.find("X1.B1")->nplus == "1");
    CHECK(f.find("X1.B1")->nminus == "x1.m");
    CHECK(f.find("X2.B2")->nminus == "0");
    CHECK(f.find("X2.R1")->nminus == "0");
  }
  SUBCASE("nested instances multiply sizes") {
    const auto n = parse_netlist(sub + ".subckt quad a b\nXA a c pair\nXB c b pair\n.ends\nX1 1 0 quad\nR9 1 0 1\n");
    const auto f = flatten(n);
    CHECK(f.elements.size() == 7);
    CHECK(f.find("X1.XB.B2") != nullptr);
  }
  SUBCASE("self-including subcircuit") {
    const auto n = parse_netlist(".subckt loop a\nR1 a 0 1\nX1 a loop\n.ends\nX1 1 loop\nR2 1 0 1\n");
    CHECK_THROWS_AS(flatten(n), ElaborationError);
  }
  SUBCASE("arity mismatch") {
    const auto n = parse_netlist(sub + "X1 1 pair\nR9 1 0 1\n");
    CHECK_THROWS_AS(flatten(n), ElaborationError);
  }
}

TEST_CASE("lint") {
  SUBCASE("shipped netlists are clean") {
    for (const char* f : {"jtl5.cir", "mcg.cir", "mndro_loop.cir", "ndro_loop.cir", "jj_single.cir", "dcsfq_store.cir"})
      CHECK_MESSAGE(lint(read_netlist_file(netlist_path(f))).empty(), f);
  }
  SUBCASE("dangling inductor terminal") {
    const auto d = lint(parse_netlist("R1 1 0 1\nL1 1 2 1p\n.tran 1p 10p\n"));
    CHECK(has_errors(d));
    CHECK(has_code(d, "dangling-node"));
  }
  SUBCASE("unused model") {
    const auto d = lint(parse_netlist(".model spare jj(icrit=1u)\nR1 1 0 1\nR2 1 0 1\n.tran 1p 10p\n"));
    CHECK_FALSE(has_errors(d));
    CHECK(has_code(d, "unused-model"));
  }
  SUBCASE("floating junction") {
    const auto d = lint(parse_netlist(".model j jj(icrit=1u)\nB1 1 2 j\nB2 1 2 j\n.tran 1p 10p\n"));
    CHECK(has_code(d, "floating-junction"));
  }
  SUBCASE("missing tran and hard step") {
    const auto d = lint(parse_netlist("I1 0 1 dc 1u\nR1 1 0 1\n"));
    CHECK(has_code(d, "missing-tran"));
    CHECK(has_code(d, "hard-step"));
  }
  SUBCASE("unknown probe") {
    const auto d = lint(parse_netlist("R1 1 0 1\nR2 1 0 1\n.tran 1p 10p\n.print v(7) phase(R1)\n"));
    CHECK(has_code(d, "unknown-probe"));
  }
}
