#include "sfq/cells.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

namespace sfq {

namespace {

struct KindInfo {
  CellKind kind;
  const char* name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  int jj;
};

// JJ counts: wiring cells from the wiring-cell table, memory unit from the
// RDFF parameter table (J1-J11), MCG/RG three junctions, DFF storage structure three.
const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table = {
      {CellKind::JTL, "jtl", {"in"}, {"out"}, 2},
      {CellKind::SPL, "spl", {"in"}, {"out0", "out1"}, 3},
      {CellKind::CBU, "cbu", {"in0", "in1"}, {"out"}, 7},
      {CellKind::DFF, "dff", {"in", "clk"}, {"out"}, 3},
      {CellKind::MemoryUnit, "memory", {"set", "rst", "clk"}, {"out"}, 11},
      {CellKind::MCG, "mcg", {"in"}, {"out"}, 3},
      {CellKind::RG, "rg", {"in"}, {"out"}, 3},
  };
  return table;
}

const KindInfo& info(CellKind kind) {
  for (const auto& k : kinds())
    if (k.kind == kind) return k;
  throw std::logic_error("unknown cell kind");
}

bool has(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string ref_name(const BehavioralCircuit& c, const PortRef& p) { return c.cells()[p.cell].name + "." + p.port; }

int port_priority(const std::string& port) {
  if (port == "set") return 0;
  if (port == "rst") return 1;
  if (port == "clk") return 2;
  return 3;
}

}  // namespace

void CellTimings::set(std::string_view key, double ps) {
  const SimTime t = SimTime::from_ps(ps);
  if (key == "jtl") jtlDelay = t;
  else if (key == "spl") splDelay = t;
  else if (key == "cbu") cbuDelay = t;
  else if (key == "mem") memDelay = t;
  else if (key == "mcg") mcgSpacing = t;
  else if (key == "cbu_dead") cbuDeadTime = t;
  else throw std::invalid_argument("unknown timing key '" + std::string(key) + "'");
}

std::map<std::string, double> CellTimings::as_ps() const {
  return {{"jtl", jtlDelay.ps()}, {"spl", splDelay.ps()}, {"cbu", cbuDelay.ps()},
          {"mem", memDelay.ps()}, {"mcg", mcgSpacing.ps()}, {"cbu_dead", cbuDeadTime.ps()}};
}

void CellTimings::validate() const {
  for (const auto& [key, ps] : as_ps())
    if (!(ps > 0.0)) throw CompositionError("timing '" + key + "' must be positive");
}

std::string_view to_string(CellKind kind) { return info(kind).name; }

std::optional<CellKind> cell_kind_from(std::string_view name) {
  for (const auto& k : kinds())
    if (name == k.name) return k.kind;
  return std::nullopt;
}

const std::vector<std::string>& input_ports(CellKind kind) { return info(kind).inputs; }
const std::vector<std::string>& output_ports(CellKind kind) { return info(kind).outputs; }

int CellInstance::jj_count() const { return info(kind).jj; }

std::size_t BehavioralCircuit::add_cell(std::string name, CellKind kind, int param) {
  if (find_cell(name)) throw CompositionError("duplicate cell name '" + name + "'");
  if (param < 1) throw CompositionError("cell '" + name + "' needs a positive capacity/replica count");
  if (kind == CellKind::DFF) param = 1;
  cells_.push_back({std::move(name), kind, param, 0});
  return cells_.size() - 1;
}

std::optional<std::size_t> BehavioralCircuit::find_cell(std::string_view name) const {
  for (std::size_t k = 0; k < cells_.size(); ++k)
    if (cells_[k].name == name) return k;
  return std::nullopt;
}

const CellInstance& BehavioralCircuit::cell(std::string_view name) const {
  auto idx = find_cell(name);
  if (!idx) throw CompositionError("unknown cell '" + std::string(name) + "'");
  return cells_[*idx];
}

PortRef BehavioralCircuit::resolve(std::string_view cellName, std::string_view port, bool output) const {
  auto idx = find_cell(cellName);
  if (!idx) throw CompositionError("unknown cell '" + std::string(cellName) + "'");
  const auto& ports = output ? output_ports(cells_[*idx].kind) : input_ports(cells_[*idx].kind);
  if (!has(ports, port))
    throw CompositionError("cell '" + std::string(cellName) + "' has no " + (output ? "output" : "input") +
                           " port '" + std::string(port) + "'");
  return {*idx, std::string(port)};
}

void BehavioralCircuit::connect(std::string_view fromCell, std::string_view outPort, std::string_view toCell,
                                std::string_view inPort) {
  const PortRef from = resolve(fromCell, outPort, true);
  const PortRef to = resolve(toCell, inPort, false);
  for (const auto& n : nets_) {
    if (n.from == from) throw CompositionError("output " + ref_name(*this, from) + " already drives a net (use an SPL)");
    if (n.to == to) throw CompositionError("input " + ref_name(*this, to) + " already has a driver (use a CBU)");
  }
  if (outputs_.contains(from)) throw CompositionError("output " + ref_name(*this, from) + " is an external port");
  for (const auto& [name, ref] : inputs_)
    if (ref == to) throw CompositionError("input " + ref_name(*this, to) + " is driven by external port " + name);
  nets_.push_back({from, to});
}

void BehavioralCircuit::add_input(std::string name, std::string_view cellName, std::string_view port) {
  const PortRef to = resolve(cellName, port, false);
  if (inputs_.contains(name)) throw CompositionError("duplicate external input '" + name + "'");
  for (const auto& n : nets_)
    if (n.to == to) throw CompositionError("input " + ref_name(*this, to) + " already has a driver");
  for (const auto& [other, ref] : inputs_)
    if (ref == to) throw CompositionError("input " + ref_name(*this, to) + " already bound to " + other);
  inputs_.emplace(std::move(name), to);
}

void BehavioralCircuit::add_output(std::string name, std::string_view cellName, std::string_view port) {
  const PortRef from = resolve(cellName, port, true);
  for (const auto& n : nets_)
    if (n.from == from) throw CompositionError("output " + ref_name(*this, from) + " already drives a net");
  for (const auto& [ref, other] : outputs_)
    if (other == name) throw CompositionError("duplicate external output '" + name + "'");
  if (outputs_.contains(from)) throw CompositionError("output " + ref_name(*this, from) + " already external");
  outputs_.emplace(from, std::move(name));
}

const Net* BehavioralCircuit::net_from(const PortRef& out) const {
  for (const auto& n : nets_)
    if (n.from == out) return &n;
  return nullptr;
}

SimTime BehavioralCircuit::cell_delay(const CellInstance& c) const {
  switch (c.kind) {
    case CellKind::JTL: return timings.jtlDelay;
    case CellKind::SPL: return timings.splDelay;
    case CellKind::CBU: return timings.cbuDelay;
    case CellKind::DFF:
    case CellKind::MemoryUnit: return timings.memDelay;
    case CellKind::MCG:
    case CellKind::RG: return SimTime{};
  }
  return SimTime{};
}

void BehavioralCircuit::validate() const {
  timings.validate();
  // Zero-delay cycles would make the event loop spin at a single instant.
  std::vector<int> color(cells_.size(), 0);
  std::function<void(std::size_t)> dfs = [&](std::size_t u) {
    color[u] = 1;
    for (const auto& n : nets_) {
      if (n.from.cell != u || cell_delay(cells_[u]) > SimTime{}) continue;
      const auto v = n.to.cell;
      if (cell_delay(cells_[v]) > SimTime{}) continue;
      if (color[v] == 1) throw CompositionError("zero-delay cycle through cell '" + cells_[v].name + "'");
      if (color[v] == 0) dfs(v);
    }
    color[u] = 2;
  };
  for (std::size_t k = 0; k < cells_.size(); ++k)
    if (color[k] == 0) dfs(k);
}

namespace {

void wire_feedback(BehavioralCircuit& c) {
  c.add_cell("cbu", CellKind::CBU);
  c.add_cell("spl", CellKind::SPL);
  c.add_cell("jtl", CellKind::JTL);
  c.connect("cbu", "out", "mem", "set");
  c.connect("mem", "out", "spl", "in");
  c.connect("spl", "out1", "jtl", "in");
  c.connect("jtl", "out", "cbu", "in1");
  c.add_input("set", "cbu", "in0");
  c.add_output("out", "spl", "out0");
}

}  // namespace

BehavioralCircuit build_ndro(const CellTimings& timings) {
  timings.validate();
  BehavioralCircuit c;
  c.timings = timings;
  c.add_cell("mem", CellKind::MemoryUnit, 1);
  wire_feedback(c);
  c.add_input("rst", "mem", "rst");
  c.add_input("clk", "mem", "clk");
  c.validate();
  return c;
}

BehavioralCircuit build_mndro(bool withRG, const CellTimings& timings) {
  timings.validate();
  constexpr int replicas = 3;
  // Every internal read must finish before the first reload returns, or a
  // reloaded fluxon would be read a second time within the same clock.
  const SimTime span = timings.mcgSpacing * (replicas - 1);
  const SimTime reload = timings.memDelay + timings.reload_latency();
  if (!(span < reload))
    throw CompositionError("timing violates (N-1)*mcgSpacing < memDelay + splDelay + jtlDelay + cbuDelay: " +
                           format_ps(span) + " ps >= " + format_ps(reload) + " ps");
  // Reloads arrive mcgSpacing apart at the CBU; closer than its dead time they would merge.
  if (timings.mcgSpacing < timings.cbuDeadTime)
    throw CompositionError("timing violates mcgSpacing >= cbuDeadTime: " + format_ps(timings.mcgSpacing) +
                           " ps < " + format_ps(timings.cbuDeadTime) + " ps");

  BehavioralCircuit c;
  c.timings = timings;
  c.add_cell("mem", CellKind::MemoryUnit, replicas);
  wire_feedback(c);
  c.add_cell("mcg", CellKind::MCG, replicas);
  c.connect("mcg", "out", "mem", "clk");
  c.add_input("clk", "mcg", "in");
  if (withRG) {
    c.add_cell("rg", CellKind::RG, replicas);
    c.connect("rg", "out", "mem", "rst");
    c.add_input("rst", "rg", "in");
  } else {
    c.add_input("rst", "mem", "rst");
  }
  c.validate();
  return c;
}

int behavioral_jj_count(const BehavioralCircuit& circuit) {
  int total = 0;
  for (const auto& c : circuit.cells()) total += c.jj_count();
  return total;
}

FeedbackPath feedback_path(const BehavioralCircuit& circuit, std::string_view memoryCell) {
  const auto mem = circuit.find_cell(memoryCell);
  if (!mem) throw CompositionError("no memory cell '" + std::string(memoryCell) + "'");
  const PortRef target{*mem, circuit.cells()[*mem].kind == CellKind::DFF ? "in" : "set"};

  std::vector<std::size_t> path;
  std::set<std::size_t> visited;
  std::function<bool(const PortRef&)> walk = [&](const PortRef& out) -> bool {
    const Net* n = circuit.net_from(out);
    if (!n) return false;
    if (n->to == target) return true;
    const auto next = n->to.cell;
    if (next == *mem || !visited.insert(next).second) return false;
    path.push_back(next);
    for (const auto& port : output_ports(circuit.cells()[next].kind))
      if (walk({next, port})) return true;
    path.pop_back();
    return false;
  };
  FeedbackPath fp;
  if (!walk({*mem, "out"})) throw CompositionError("no feedback path from '" + std::string(memoryCell) + "'");
  for (auto idx : path) {
    const auto& c = circuit.cells()[idx];
    fp.cells.push_back(c.name);
    fp.delay += circuit.cell_delay(c);
    fp.jjCount += c.jj_count();
  }
  return fp;
}

namespace {

struct QueuedEvent {
  SimTime time;
  std::uint64_t seq;
  std::size_t cell;
  std::string port;
  bool output;  // an emission on an output port, otherwise an arrival on an input port
  bool operator>(const QueuedEvent& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

class EventSim {
public:
  EventSim(const BehavioralCircuit& c, SimTime tstop, const SimOptions& opts)
      : c_(c), tstop_(tstop), opts_(opts), cells_(c.cells()), cbu_(cells_.size()) {}

  SimResult run(const std::vector<PulseEvent>& schedule) {
    std::vector<PulseEvent> sorted = schedule;
    std::stable_sort(sorted.begin(), sorted.end(), [](const PulseEvent& a, const PulseEvent& b) {
      if (a.time != b.time) return a.time < b.time;
      return port_priority(a.port) < port_priority(b.port);
    });
    std::map<std::string, SimTime> lastOnPort;
    for (const auto& ev : sorted) {
      auto it = c_.inputs().find(ev.port);
      if (it == c_.inputs().end()) throw ScheduleError("pulse on unknown port '" + ev.port + "'");
      if (ev.time < SimTime{}) throw ScheduleError("negative time on port '" + ev.port + "'");
      if (!(ev.time < tstop_))
        throw ScheduleError("pulse on '" + ev.port + "' at " + format_ps(ev.time) + " ps is not before tstop");
      if (auto last = lastOnPort.find(ev.port);
          last != lastOnPort.end() && ev.time - last->second < opts_.settlingWindow)
        result_.warnings.push_back("pulses on '" + ev.port + "' at " + format_ps(last->second) + " and " +
                                   format_ps(ev.time) + " ps are closer than the settling window");
      lastOnPort[ev.port] = ev.time;
      push(ev.time, it->second.cell, it->second.port, false);
    }

    while (!queue_.empty()) {
      QueuedEvent ev = queue_.top();
      queue_.pop();
      if (ev.time > tstop_) break;
      if (ev.output) {
        emit(ev);
      } else {
        receive(ev);
      }
    }
    for (const auto& cell : cells_)
      if (cell.stateful()) result_.finalStates[cell.name] = cell.state;
    return std::move(result_);
  }

private:
  void push(SimTime t, std::size_t cell, std::string port, bool output) {
    queue_.push({t, seq_++, cell, std::move(port), output});
  }

  void note(SimTime t, std::size_t cell, std::string what) {
    if (opts_.trace) result_.trace.push_back({t, cells_[cell].name, std::move(what)});
  }

  void emit(const QueuedEvent& ev) {
    note(ev.time, ev.cell, "out " + ev.port);
    const PortRef ref{ev.cell, ev.port};
    if (auto out = c_.outputs().find(ref); out != c_.outputs().end()) {
      result_.outputs.push_back({ev.time, out->second});
    } else if (const Net* n = c_.net_from(ref)) {
      receive({ev.time, 0, n->to.cell, n->to.port, false});
    }
  }

  void change_state(SimTime t, std::size_t idx, int next) {
    auto& cell = cells_[idx];
    if (next != cell.state) note(t, idx, "state " + std::to_string(cell.state) + "->" + std::to_string(next));
    cell.state = next;
  }

  void receive(const QueuedEvent& ev) {
    auto& cell = cells_[ev.cell];
    const auto& tm = c_.timings;
    note(ev.time, ev.cell, "in " + ev.port);
    switch (cell.kind) {
      case CellKind::JTL:
        push(ev.time + tm.jtlDelay, ev.cell, "out", true);
        break;
      case CellKind::SPL:
        push(ev.time + tm.splDelay, ev.cell, "out0", true);
        push(ev.time + tm.splDelay, ev.cell, "out1", true);
        break;
      case CellKind::CBU: {
        auto& st = cbu_[ev.cell];
        if (st.lastAccepted && ev.time - *st.lastAccepted < tm.cbuDeadTime && !st.merged) {
          st.merged = true;
          note(ev.time, ev.cell, "merge " + ev.port);
          result_.warnings.push_back("cbu '" + cell.name + "' merged two pulses at " + format_ps(ev.time) + " ps");
        } else {
          st.lastAccepted = ev.time;
          st.merged = false;
          push(ev.time + tm.cbuDelay, ev.cell, "out", true);
        }
        break;
      }
      case CellKind::DFF:
      case CellKind::MemoryUnit:
        if (ev.port == "set" || ev.port == "in") {
          if (cell.state == cell.param) note(ev.time, ev.cell, "saturate");
          change_state(ev.time, ev.cell, std::min(cell.state + 1, cell.param));
        } else if (ev.port == "rst") {
          change_state(ev.time, ev.cell, std::max(cell.state - 1, 0));
        } else if (cell.state > 0) {
          change_state(ev.time, ev.cell, cell.state - 1);
          push(ev.time + tm.memDelay, ev.cell, "out", true);
        } else {
          note(ev.time, ev.cell, "absorb clk");
        }
        break;
      case CellKind::MCG:
      case CellKind::RG:
        for (int k = 0; k < cell.param; ++k) push(ev.time + tm.mcgSpacing * k, ev.cell, "out", true);
        break;
    }
  }

  struct CbuState {
    std::optional<SimTime> lastAccepted;
    bool merged = false;
  };

  const BehavioralCircuit& c_;
  SimTime tstop_;
  SimOptions opts_;
  std::vector<CellInstance> cells_;
  std::vector<CbuState> cbu_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  SimResult result_;
};

}  // namespace

SimResult simulate(const BehavioralCircuit& circuit, const std::vector<PulseEvent>& schedule, SimTime tstop,
                   const SimOptions& options) {
  circuit.validate();
  EventSim sim(circuit, tstop, options);
  return sim.run(schedule);
}

namespace {

std::pair<std::string, std::string> split_ref(const std::string& ref, int line) {
  const auto dot = ref.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size())
    throw CompositionError("line " + std::to_string(line) + ": expected <cell>.<port>, got '" + ref + "'");
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

}  // namespace

BehavioralCircuit parse_circuit(std::string_view text) {
  BehavioralCircuit c;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto fail = [&](const std::string& msg) {
      throw CompositionError("line " + std::to_string(line) + ": " + msg);
    };
    if (tok[0] == "cell") {
      if (tok.size() < 3 || tok.size() > 4) fail("expected 'cell <name> <kind> [param]'");
      auto kind = cell_kind_from(tok[2]);
      if (!kind) fail("unknown cell kind '" + tok[2] + "'");
      int param = 1;
      if (tok.size() == 4) {
        try {
          param = std::stoi(tok[3]);
        } catch (const std::exception&) {
          fail("bad cell parameter '" + tok[3] + "'");
        }
      }
      c.add_cell(tok[1], *kind, param);
    } else if (tok[0] == "net") {
      if (tok.size() != 3) fail("expected 'net <cell>.<port> <cell>.<port>'");
      auto [fc, fp] = split_ref(tok[1], line);
      auto [tc, tp] = split_ref(tok[2], line);
      c.connect(fc, fp, tc, tp);
    } else if (tok[0] == "input" || tok[0] == "output") {
      if (tok.size() != 3) fail("expected '" + tok[0] + " <name> <cell>.<port>'");
      auto [cell, port] = split_ref(tok[2], line);
      if (tok[0] == "input") {
        c.add_input(tok[1], cell, port);
      } else {
        c.add_output(tok[1], cell, port);
      }
    } else if (tok[0] == "timing") {
      if (tok.size() != 3) fail("expected 'timing <key> <ps>'");
      try {
        c.timings.set(tok[1], std::stod(tok[2]));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else {
      fail("unknown directive '" + tok[0] + "'");
    }
  }
  c.validate();
  return c;
}

std::string to_text(const BehavioralCircuit& c) {
  std::ostringstream out;
  for (const auto& [key, ps] : c.timings.as_ps()) out << "timing " << key << ' ' << ps << '\n';
  for (const auto& cell : c.cells()) {
    out << "cell " << cell.name << ' ' << to_string(cell.kind);
    if (cell.kind == CellKind::MemoryUnit || cell.kind == CellKind::MCG || cell.kind == CellKind::RG)
      out << ' ' << cell.param;
    out << '\n';
  }
  for (const auto& n : c.nets()) out << "net " << ref_name(c, n.from) << ' ' << ref_name(c, n.to) << '\n';
  for (const auto& [name, ref] : c.inputs()) out << "input " << name << ' ' << ref_name(c, ref) << '\n';
  for (const auto& [ref, name] : c.outputs()) out << "output " << name << ' ' << ref_name(c, ref) << '\n';
  return out.str();
}

}  // namespace sfq
