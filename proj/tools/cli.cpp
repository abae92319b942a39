#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "sfq/analog.hpp"
#include "sfq/cells.hpp"
#include "sfq/margin.hpp"
#include "sfq/netlist.hpp"
#include "sfq/oracle.hpp"
#include "sfq/waveio.hpp"

namespace sfq::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FunctionalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bare numbers are picoseconds; suffixed values ("0.1p", "2n") are taken as written.
double seconds_from(const std::string& text, const char* flag) {
  auto v = parse_value(text);
  if (!v || !(*v > 0.0)) throw InputError(std::string("bad value for ") + flag + ": '" + text + "'");
  const bool bare = !text.empty() && (std::isdigit(static_cast<unsigned char>(text.back())) || text.back() == '.');
  return bare ? *v * 1e-12 : *v;
}

std::string require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("file not found: " + path);
  return read_text_file(path);
}

void apply_timings(CellTimings& t, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--timings expects key=value, got '" + kv + "'");
    try {
      t.set(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--timings ") + kv + ": " + e.what());
    }
  }
}

struct CircuitChoice {
  std::function<BehavioralCircuit(const CellTimings&)> build;
  std::optional<OracleKind> kind;
  CellTimings nominal;
};

CircuitChoice choose_circuit(const std::string& name, const std::vector<std::string>& timingOverrides) {
  CircuitChoice c;
  apply_timings(c.nominal, timingOverrides);
  if (name == "ndro") {
    c.build = [](const CellTimings& t) { return build_ndro(t); };
    c.kind = OracleKind::NDRO;
  } else if (name == "mndro-rst") {
    c.build = [](const CellTimings& t) { return build_mndro(true, t); };
    c.kind = OracleKind::MNDRO_RESET;
  } else if (name == "mndro-dec") {
    c.build = [](const CellTimings& t) { return build_mndro(false, t); };
    c.kind = OracleKind::MNDRO_DECREMENT;
  } else {
    const auto text = require_file(name);
    const auto parsed = parse_circuit(text);
    // File timings are the baseline; --timings overrides them.
    c.nominal = parsed.timings;
    apply_timings(c.nominal, timingOverrides);
    c.build = [parsed](const CellTimings& t) {
      BehavioralCircuit copy = parsed;
      copy.timings = t;
      copy.validate();
      return copy;
    };
  }
  return c;
}

SimTime default_tstop(const std::vector<PulseEvent>& events) {
  SimTime last;
  for (const auto& e : events) last = std::max(last, e.time);
  return last + SimTime::from_fs(200000);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file_atomic(path, content);
  }
}

FlatNetlist load_flat(const std::string& path, std::ostream& err) {
  const auto text = require_file(path);
  const Netlist net = parse_netlist(text);
  const auto diags = lint(net);
  for (const auto& d : diags)
    if (d.severity == Severity::Error) err << path << ": " << to_string(d) << '\n';
  if (has_errors(diags)) throw InputError("netlist has lint errors");
  return flatten(net);
}

int cmd_lint(const std::string& path, std::ostream& out) {
  const Netlist net = parse_netlist(require_file(path));
  const auto diags = lint(net);
  for (const auto& d : diags) out << path << ": " << to_string(d) << '\n';
  if (diags.empty()) out << path << ": ok\n";
  return has_errors(diags) ? kInputError : kSuccess;
}

struct TranOptions {
  std::string netlist, dt, tstop, out, events, vcd;
};

int cmd_tran(const TranOptions& o, std::ostream& out, std::ostream& err) {
  const FlatNetlist flat = load_flat(o.netlist, err);
  TransientConfig cfg;
  if (!o.dt.empty()) cfg.dt = seconds_from(o.dt, "--dt");
  if (!o.tstop.empty()) cfg.tstop = seconds_from(o.tstop, "--tstop");
  const auto result = run_transient(flat, cfg);
  const double start = flat.tran ? flat.tran->start : 0.0;
  if (!o.out.empty()) emit(o.out, write_waveform_csv(result.waveform, flat.probes, start), out);
  if (!o.vcd.empty()) emit(o.vcd, write_vcd(result.events), out);
  const std::string events = write_events(result.events);
  if (!o.events.empty()) {
    emit(o.events, events, out);
  } else if (o.out != "-") {
    out << events;
  }
  err << result.waveform.size() << " samples, " << result.events.size() << " phase slips";
  if (result.halvedSteps) err << ", " << result.halvedSteps << " halved steps";
  err << '\n';
  return kSuccess;
}

struct BsimOptions {
  std::string circuit, schedule, tstop, out, trace, vcd;
  std::vector<std::string> timings;
};

int cmd_bsim(const BsimOptions& o, std::ostream& out, std::ostream& err) {
  const auto choice = choose_circuit(o.circuit, o.timings);
  const auto schedule = read_schedule(require_file(o.schedule));
  BehavioralCircuit circuit;
  try {
    circuit = choice.build(choice.nominal);
  } catch (const CompositionError& e) {
    throw InputError(e.what());
  }
  const SimTime tstop = o.tstop.empty() ? default_tstop(schedule.events)
                                        : SimTime::from_seconds(seconds_from(o.tstop, "--tstop"));
  SimOptions opts;
  opts.trace = !o.trace.empty();
  const auto result = simulate(circuit, schedule.events, tstop, opts);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  emit(o.out, write_events(result.outputs), out);
  if (!o.trace.empty()) emit(o.trace, write_trace(result.trace), out);
  if (!o.vcd.empty()) emit(o.vcd, write_vcd(result.outputs), out);
  return kSuccess;
}

struct OracleOptions {
  std::string kind, schedule, events, window, port = "out";
};

int cmd_oracle(const OracleOptions& o, std::ostream& out) {
  const auto kind = oracle_kind_from(o.kind);
  if (!kind) throw InputError("unknown oracle kind '" + o.kind + "'");
  const auto schedule = read_schedule(require_file(o.schedule));
  const auto observedEvents = read_events(require_file(o.events));
  const SimTime window = o.window.empty() ? kDefaultCompareWindow
                                          : SimTime::from_seconds(seconds_from(o.window, "--window"));
  const auto sym = symbols_from_schedule(schedule.events);
  const auto expected = run_oracle(*kind, sym.symbols);
  std::vector<SimTime> observed;
  for (const auto& e : observedEvents)
    if (e.port == o.port) observed.push_back(e.time);
  const Verdict v = compare_trace(expected, observed, sym.clockTimes, window);
  out << to_string(v) << '\n';
  return v.pass ? kSuccess : kFunctionalFailure;
}

struct MarginOptions {
  std::string circuit, netlist, kind, out, window, dt, tstop;
  std::vector<std::string> schedules, params, timings, watch;
  double resolution = 0.005;
  double low = 0.2;
  double high = 3.0;
  int threads = 0;
};

int cmd_margins(const MarginOptions& o, std::ostream& out, std::ostream& err) {
  MarginSpec spec;
  if (!o.netlist.empty()) {
    AnalogTarget target;
    target.netlist = load_flat(o.netlist, err);
    target.watch = o.watch;
    target.only = {};
    for (const auto& p : o.params) target.only.push_back(upper(p));
    if (!o.dt.empty()) target.dt = seconds_from(o.dt, "--dt");
    if (!o.tstop.empty()) target.tstop = seconds_from(o.tstop, "--tstop");
    spec = analog_margin_spec(target);
  } else if (!o.circuit.empty()) {
    const auto choice = choose_circuit(o.circuit, o.timings);
    BehavioralTarget target;
    target.build = choice.build;
    target.nominal = choice.nominal;
    auto kind = o.kind.empty() ? choice.kind : oracle_kind_from(o.kind);
    if (!kind) throw InputError("--kind is required for circuit files");
    target.kind = *kind;
    if (o.schedules.empty()) throw InputError("margins on a behavioral circuit needs at least one --schedule");
    for (const auto& s : o.schedules) target.schedules.push_back(read_schedule(require_file(s)).events);
    if (!o.window.empty()) target.window = SimTime::from_seconds(seconds_from(o.window, "--window"));
    target.keys = o.params;
    spec = behavioral_margin_spec(target);
  } else {
    throw InputError("margins needs --circuit or --netlist");
  }
  spec.resolution = o.resolution;
  spec.lowBound = o.low;
  spec.highBound = o.high;
  spec.threads = o.threads;
  MarginReport report;
  try {
    report = margin_sweep(spec);
  } catch (const MarginError& e) {
    if (std::string(e.what()) == "nominal fails") throw FunctionalFailure(e.what());
    throw;
  }
  out << render_table(report);
  if (!o.out.empty()) emit(o.out, write_margin_csv(report), out);
  return kSuccess;
}

int cmd_capacity(const std::string& netlistPath, const std::string& loopSpec, std::ostream& out,
                 std::ostream& err) {
  const FlatNetlist flat = load_flat(netlistPath, err);
  double inductance = 0.0;
  double ic = 0.0;
  std::string ls;
  std::string js;
  std::stringstream ss(loopSpec);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    const Element* e = flat.find(name);
    if (!e) throw InputError("loop element '" + name + "' not found");
    if (e->kind == ElementKind::Inductor) {
      inductance += e->value;
      ls += (ls.empty() ? "" : "+") + e->name;
    } else if (e->kind == ElementKind::Junction) {
      const double c = flat.icrit_of(*e);
      ic = ic == 0.0 ? c : std::min(ic, c);
      js += (js.empty() ? "" : ",") + e->name;
    } else {
      throw InputError("loop element '" + name + "' is neither inductor nor junction");
    }
  }
  if (inductance == 0.0 || ic == 0.0) throw InputError("loop needs at least one inductor and one junction");
  const double cap = storage_capacity(inductance, ic);
  char buf[256];
  std::snprintf(buf, sizeof buf, "capacity %.3f Phi0 (Ic x L = %.1f uA x %.2f pH)\n", cap, ic * 1e6,
                inductance * 1e12);
  out << buf;
  out << "  L  = series sum of " << ls << "\n  Ic = minimum critical current over " << js << '\n';
  out << "  note: this is the naive min-Ic x series-L reading of the loop. Junction and bias\n"
         "  inductances are not included, so compare against the 1 / 3 Phi0 storage\n"
         "  thresholds with care.\n";
  std::snprintf(buf, sizeof buf, "  single-fluxon threshold (>1): %s; three-fluxon threshold (>3): %s\n",
                cap > 1.0 ? "met" : "not met", cap > 3.0 ? "met" : "not met");
  out << buf;
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sfqsim: SFQ memory cell simulation and verification"};
  app.require_subcommand(1);
  // Reserved for stochastic engines; the current engines are deterministic.
  if (const char* seed = std::getenv("SFQSIM_SEED")) (void)seed;

  std::string lintPath;
  auto* lintCmd = app.add_subcommand("lint", "Check a netlist for structural problems");
  lintCmd->add_option("netlist", lintPath, "Netlist file")->required();

  TranOptions tran;
  auto* tranCmd = app.add_subcommand("tran", "Run an analog transient simulation");
  tranCmd->add_option("netlist", tran.netlist, "Netlist file")->required();
  tranCmd->add_option("--dt", tran.dt, "Time step (ps, or suffixed value)");
  tranCmd->add_option("--tstop", tran.tstop, "Stop time (ps, or suffixed value)");
  tranCmd->add_option("--out", tran.out, "Waveform CSV output");
  tranCmd->add_option("--events", tran.events, "Phase-slip event output");
  tranCmd->add_option("--vcd", tran.vcd, "VCD output");

  BsimOptions bsim;
  auto* bsimCmd = app.add_subcommand("bsim", "Run the behavioral event simulator");
  bsimCmd->add_option("--circuit", bsim.circuit, "ndro, mndro-rst, mndro-dec or a circuit file")->required();
  bsimCmd->add_option("--schedule", bsim.schedule, "Pulse schedule file")->required();
  bsimCmd->add_option("--tstop", bsim.tstop, "Stop time (ps); default last pulse + 200 ps");
  bsimCmd->add_option("--timings", bsim.timings, "Timing overrides key=ps (jtl spl cbu mem mcg cbu_dead)");
  bsimCmd->add_option("--out,--events", bsim.out, "Event trace output (default stdout)");
  bsimCmd->add_option("--trace", bsim.trace, "Internal cell trace output");
  bsimCmd->add_option("--vcd", bsim.vcd, "VCD output");

  OracleOptions oracle;
  auto* oracleCmd = app.add_subcommand("oracle", "Compare an event trace with the reference state machine");
  oracleCmd->add_option("--kind", oracle.kind, "ndro, mndro-rst or mndro-dec")->required();
  oracleCmd->add_option("--schedule", oracle.schedule, "Pulse schedule file")->required();
  oracleCmd->add_option("--events", oracle.events, "Observed event trace")->required();
  oracleCmd->add_option("--window", oracle.window, "Per-clock window (ps), default 50");
  oracleCmd->add_option("--port", oracle.port, "Output port to count (default out)");

  MarginOptions margins;
  auto* marginCmd = app.add_subcommand("margins", "Per-parameter operating margins");
  marginCmd->add_option("--circuit", margins.circuit, "Behavioral circuit: ndro, mndro-rst, mndro-dec or file");
  marginCmd->add_option("--netlist", margins.netlist, "Analog netlist");
  marginCmd->add_option("--kind", margins.kind, "Oracle kind for circuit files");
  marginCmd->add_option("--schedule", margins.schedules, "Test-vector schedule (repeatable)");
  marginCmd->add_option("--param", margins.params, "Restrict to these parameters (repeatable)");
  marginCmd->add_option("--timings", margins.timings, "Nominal timing overrides key=ps");
  marginCmd->add_option("--watch", margins.watch, "Junctions whose pulse counts must match nominal");
  marginCmd->add_option("--resolution", margins.resolution, "Bisection resolution (factor)");
  marginCmd->add_option("--low", margins.low, "Lower search bound (factor)");
  marginCmd->add_option("--high", margins.high, "Upper search bound (factor)");
  marginCmd->add_option("--window", margins.window, "Per-clock window (ps)");
  marginCmd->add_option("--dt", margins.dt, "Analog time step");
  marginCmd->add_option("--tstop", margins.tstop, "Analog stop time");
  marginCmd->add_option("--threads", margins.threads, "Worker threads (0 = all cores)");
  marginCmd->add_option("--out", margins.out, "Margin CSV output");

  std::string capNetlist;
  std::string capLoop;
  auto* capCmd = app.add_subcommand("capacity", "Ic x L of a storage loop in flux quanta");
  capCmd->add_option("--netlist", capNetlist, "Netlist file")->required();
  capCmd->add_option("--loop", capLoop, "Comma-separated loop elements, e.g. B1,L2,L6,B6,B7")->required();

  std::vector<std::string> argvStore;
  argvStore.reserve(args.size() + 1);
  argvStore.emplace_back("sfqsim");
  argvStore.insert(argvStore.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argvStore) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*lintCmd) return cmd_lint(lintPath, out);
    if (*tranCmd) return cmd_tran(tran, out, err);
    if (*bsimCmd) return cmd_bsim(bsim, out, err);
    if (*oracleCmd) return cmd_oracle(oracle, out);
    if (*marginCmd) return cmd_margins(margins, out, err);
    if (*capCmd) return cmd_capacity(capNetlist, capLoop, out, err);
  } catch (const FunctionalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kFunctionalFailure;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace sfq::cli
