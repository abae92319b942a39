#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfq/analog.hpp"
#include "sfq/cells.hpp"
#include "sfq/margin.hpp"
#include "sfq/netlist.hpp"
#include "sfq/oracle.hpp"
#include "sfq/waveio.hpp"

namespace py = pybind11;
using namespace sfq;

namespace {

BehavioralCircuit builtin_circuit(const std::string& name, const std::map<std::string, double>& timings) {
  CellTimings t;
  for (const auto& [k, v] : timings) t.set(k, v);
  if (name == "ndro") return build_ndro(t);
  if (name == "mndro-rst") return build_mndro(true, t);
  if (name == "mndro-dec") return build_mndro(false, t);
  BehavioralCircuit c = parse_circuit(name);
  for (const auto& [k, v] : timings) c.timings.set(k, v);
  c.validate();
  return c;
}

OracleKind kind_from(const std::string& name) {
  auto k = oracle_kind_from(name);
  if (!k) throw py::value_error("unknown oracle kind '" + name + "'");
  return *k;
}

std::vector<Symbol> symbols_from(const std::string& text) {
  std::vector<Symbol> out;
  for (char c : text) {
    if (c == 's' || c == 'S') out.push_back(Symbol::SET);
    else if (c == 'r' || c == 'R') out.push_back(Symbol::RST);
    else if (c == 'c' || c == 'C') out.push_back(Symbol::CLK);
    else if (c != ' ' && c != ',') throw py::value_error(std::string("bad symbol '") + c + "'");
  }
  return out;
}

py::dict transient(const std::string& netlistText, std::optional<double> dt, std::optional<double> tstop) {
  const FlatNetlist flat = flatten(parse_netlist(netlistText));
  TransientConfig cfg;
  cfg.dt = dt;
  cfg.tstop = tstop;
  TransientResult r;
  {
    py::gil_scoped_release release;
    r = run_transient(flat, cfg);
  }
  py::list events;
  for (const auto& e : r.events) events.append(py::make_tuple(e.junction, e.time, e.index));
  py::dict phases;
  for (std::size_t k = 0; k < r.waveform.junctions.size(); ++k) {
    std::vector<double> col;
    col.reserve(r.waveform.size());
    for (const auto& row : r.waveform.phases) col.push_back(row[k]);
    phases[py::str(r.waveform.junctions[k])] = col;
  }
  py::dict voltages;
  for (std::size_t k = 0; k < r.waveform.nodes.size(); ++k) {
    std::vector<double> col;
    col.reserve(r.waveform.size());
    for (const auto& row : r.waveform.voltages) col.push_back(row[k]);
    voltages[py::str(r.waveform.nodes[k])] = col;
  }
  py::dict out;
  out["times"] = r.waveform.times;
  out["voltages"] = voltages;
  out["phases"] = phases;
  out["events"] = events;
  out["halved_steps"] = r.halvedSteps;
  out["pulse_areas"] = py::cpp_function([wf = r.waveform](const std::string& j, double t1, double t2) {
    return pulse_area(wf, j, t1, t2);
  });
  return out;
}

py::list simulate_schedule(const std::string& circuit, const std::string& scheduleText,
                           std::optional<double> tstopPs, const std::map<std::string, double>& timings) {
  const auto c = builtin_circuit(circuit, timings);
  const auto sched = read_schedule(scheduleText);
  SimTime tstop;
  if (tstopPs) {
    tstop = SimTime::from_ps(*tstopPs);
  } else {
    for (const auto& e : sched.events) tstop = std::max(tstop, e.time);
    tstop = tstop + SimTime::from_ps(200);
  }
  const auto r = simulate(c, sched.events, tstop);
  py::list out;
  for (const auto& e : r.outputs) out.append(py::make_tuple(e.port, e.time.ps()));
  return out;
}

std::string check_trace(const std::string& kind, const std::string& scheduleText, const std::string& eventsText,
                        double windowPs) {
  const auto sched = read_schedule(scheduleText);
  const auto sym = symbols_from_schedule(sched.events);
  std::vector<SimTime> observed;
  for (const auto& e : read_events(eventsText))
    if (e.port == "out") observed.push_back(e.time);
  return to_string(
      compare_trace(run_oracle(kind_from(kind), sym.symbols), observed, sym.clockTimes, SimTime::from_ps(windowPs)));
}

py::list to_rows(const MarginReport& r) {
  py::list rows;
  for (const auto& p : r.perParameter) {
    py::dict d;
    d["name"] = p.name;
    d["low"] = p.low;
    d["high"] = p.high;
    d["low_saturated"] = p.lowSaturated;
    d["high_saturated"] = p.highSaturated;
    d["island"] = p.island;
    d["margin_percent"] = p.margin_percent();
    rows.append(d);
  }
  return rows;
}

py::dict report_dict(const MarginReport& r) {
  py::dict d;
  d["parameters"] = to_rows(r);
  d["critical_parameter"] = r.criticalParameter;
  d["critical_margin_percent"] = r.criticalMarginPercent;
  d["unbounded"] = r.unbounded;
  d["table"] = render_table(r);
  return d;
}

py::dict sweep(const std::vector<std::pair<std::string, double>>& params, const PassFn& pass, double low, double high,
               double resolution, int threads) {
  MarginSpec spec;
  for (const auto& [name, nominal] : params) spec.parameters.push_back({name, nominal});
  spec.pass = pass;
  spec.lowBound = low;
  spec.highBound = high;
  spec.resolution = resolution;
  spec.threads = threads;
  MarginReport r;
  {
    // Worker threads take the GIL only while they call back into Python.
    py::gil_scoped_release release;
    r = margin_sweep(spec);
  }
  return report_dict(r);
}

py::dict behavioral_margins(const std::string& circuit, const std::vector<std::string>& schedules,
                            const std::vector<std::string>& keys, double resolution, int threads) {
  BehavioralTarget t;
  t.build = [circuit](const CellTimings& tm) {
    std::map<std::string, double> m = tm.as_ps();
    return builtin_circuit(circuit, m);
  };
  if (circuit == "ndro") t.kind = OracleKind::NDRO;
  else if (circuit == "mndro-rst") t.kind = OracleKind::MNDRO_RESET;
  else if (circuit == "mndro-dec") t.kind = OracleKind::MNDRO_DECREMENT;
  else throw py::value_error("behavioral margins need a built-in circuit name");
  for (const auto& s : schedules) t.schedules.push_back(read_schedule(s).events);
  t.keys = keys;
  auto spec = behavioral_margin_spec(t);
  spec.resolution = resolution;
  spec.threads = threads;
  MarginReport r;
  {
    py::gil_scoped_release release;
    r = margin_sweep(spec);
  }
  return report_dict(r);
}

}  // namespace

PYBIND11_MODULE(_sfqsim, m) {
  m.doc() = "SFQ memory cell simulation: netlists, transient analysis, behavioral cells, oracles, margins";

  m.attr("FLUX_QUANTUM") = kFluxQuantum;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ElaborationError>(m, "ElaborationError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<CompositionError>(m, "CompositionError", PyExc_ValueError);
  py::register_exception<ScheduleError>(m, "ScheduleError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ArithmeticError);
  py::register_exception<MarginError>(m, "MarginError", PyExc_RuntimeError);

  m.def("parse_value", &parse_value, py::arg("text"), "Numeric literal with an engineering suffix, or None.");

  m.def(
      "lint",
      [](const std::string& text) {
        py::list out;
        for (const auto& d : lint(parse_netlist(text)))
          out.append(py::make_tuple(d.severity == Severity::Error ? "error" : "warning", d.code, d.message));
        return out;
      },
      py::arg("netlist"), "Structural diagnostics as (severity, code, message) tuples.");

  m.def("normalize_netlist", [](const std::string& text) { return to_text(parse_netlist(text)); }, py::arg("netlist"));

  m.def("run_transient", &transient, py::arg("netlist"), py::arg("dt") = py::none(), py::arg("tstop") = py::none(),
        "Transient analysis. Returns times, node voltages, junction phases, phase-slip events and a "
        "pulse_areas(junction, t1, t2) helper.");

  m.def("storage_capacity", &storage_capacity, py::arg("inductance"), py::arg("ic"));

  m.def("simulate", &simulate_schedule, py::arg("circuit"), py::arg("schedule"), py::arg("tstop_ps") = py::none(),
        py::arg("timings") = std::map<std::string, double>{},
        "Behavioral simulation of 'ndro', 'mndro-rst', 'mndro-dec' or circuit text. Returns (port, time_ps).");

  m.def(
      "feedback_path",
      [](const std::string& circuit) {
        const auto fp = feedback_path(builtin_circuit(circuit, {}));
        return py::make_tuple(fp.cells, fp.delay.ps(), fp.jjCount);
      },
      py::arg("circuit"));

  m.def(
      "run_oracle",
      [](const std::string& kind, const std::string& symbols) {
        std::vector<int> counts;
        for (const auto& e : run_oracle(kind_from(kind), symbols_from(symbols))) counts.push_back(e.count);
        return counts;
      },
      py::arg("kind"), py::arg("symbols"), "Expected pulse count per clock for a string of s/r/c symbols.");

  m.def("check_trace", &check_trace, py::arg("kind"), py::arg("schedule"), py::arg("events"),
        py::arg("window_ps") = 50.0, "Oracle verdict text for an event trace.");

  m.def("margin_sweep", &sweep, py::arg("parameters"), py::arg("passes"), py::arg("low") = 0.2, py::arg("high") = 3.0,
        py::arg("resolution") = 0.005, py::arg("threads") = 1,
        "Per-parameter margins; passes(values) receives absolute parameter values.");

  m.def("behavioral_margins", &behavioral_margins, py::arg("circuit"), py::arg("schedules"),
        py::arg("keys") = std::vector<std::string>{}, py::arg("resolution") = 0.005, py::arg("threads") = 0);
}
