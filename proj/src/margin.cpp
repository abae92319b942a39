#include "sfq/margin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "sfq/analog.hpp"

namespace sfq {

double ParameterMargin::margin_percent() const { return std::min(1.0 - low, high - 1.0) * 100.0; }

namespace {

class Evaluator {
public:
  explicit Evaluator(const MarginSpec& spec) : spec_(spec) {
    for (const auto& p : spec.parameters) nominal_.push_back(p.nominal);
  }

  bool operator()(std::size_t param, double factor) const {
    std::vector<double> values = nominal_;
    values[param] *= factor;
    try {
      return spec_.pass(values);
    } catch (const std::exception& e) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", factor);
      throw MarginError("parameter " + spec_.parameters[param].name + " at factor " + buf + ": " + e.what());
    }
  }

private:
  const MarginSpec& spec_;
  std::vector<double> nominal_;
};

// Largest passing factor between `good` (passes) and `bad` (fails), bracketed
// to within `resolution`. Works for either ordering of good and bad.
double bisect(const Evaluator& eval, std::size_t param, double good, double bad, double resolution) {
  while (std::abs(bad - good) > resolution) {
    const double mid = 0.5 * (good + bad);
    (eval(param, mid) ? good : bad) = mid;
  }
  return good;
}

ParameterMargin sweep_one(const MarginSpec& spec, const Evaluator& eval, std::size_t param) {
  ParameterMargin m;
  m.name = spec.parameters[param].name;
  if (eval(param, spec.highBound)) {
    m.high = spec.highBound;
    m.highSaturated = true;
  } else {
    m.high = bisect(eval, param, 1.0, spec.highBound, spec.resolution);
  }
  if (eval(param, spec.lowBound)) {
    m.low = spec.lowBound;
    m.lowSaturated = true;
  } else {
    m.low = bisect(eval, param, 1.0, spec.lowBound, spec.resolution);
  }
  if (spec.islandSamples > 1) {
    const double step = (spec.highBound - spec.lowBound) / (spec.islandSamples - 1);
    for (int k = 0; k < spec.islandSamples; ++k) {
      const double f = spec.lowBound + step * k;
      // Samples within one resolution step of a reported edge are undetermined.
      if (std::abs(f - m.low) <= spec.resolution || std::abs(f - m.high) <= spec.resolution) continue;
      const bool inside = f > m.low && f < m.high;
      if (eval(param, f) != inside) m.island = true;
    }
  }
  return m;
}

}  // namespace

MarginReport margin_sweep(const MarginSpec& spec) {
  if (spec.parameters.empty()) throw MarginError("no parameters to sweep");
  if (!spec.pass) throw MarginError("no pass function");
  if (!(spec.resolution > 0.0)) throw MarginError("resolution must be positive");
  if (!(spec.lowBound < 1.0 && 1.0 < spec.highBound && spec.lowBound > 0.0))
    throw MarginError("search bounds must satisfy 0 < low < 1 < high");

  const Evaluator eval(spec);
  std::vector<double> nominal;
  for (const auto& p : spec.parameters) nominal.push_back(p.nominal);
  if (!spec.pass(nominal)) throw MarginError("nominal fails");

  const std::size_t n = spec.parameters.size();
  std::vector<ParameterMargin> results(n);
  std::vector<std::exception_ptr> errors(n);
  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(n));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        results[k] = sweep_one(spec, eval, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  MarginReport report;
  report.perParameter = std::move(results);
  const auto crit = critical_margin(report);
  report.criticalParameter = crit.parameter;
  report.criticalMarginPercent = crit.percent;
  report.unbounded = crit.unbounded;
  return report;
}

CriticalMargin critical_margin(const MarginReport& report) {
  if (report.perParameter.empty()) throw MarginError("empty margin report");
  CriticalMargin best;
  best.percent = std::numeric_limits<double>::infinity();
  for (const auto& p : report.perParameter) {
    const double lowSide = (1.0 - p.low) * 100.0;
    const double highSide = (p.high - 1.0) * 100.0;
    const double m = std::min(lowSide, highSide);
    if (m < best.percent) {
      best.parameter = p.name;
      best.percent = m;
      best.unbounded = (lowSide == m ? p.lowSaturated : true) && (highSide == m ? p.highSaturated : true);
    }
  }
  return best;
}

std::string render_table(const MarginReport& report) {
  std::size_t width = 9;
  for (const auto& p : report.perParameter) width = std::max(width, p.name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s %9s  %s\n", static_cast<int>(width), "parameter", "low", "high",
                "margin%", "flags");
  out << buf;
  for (const auto& p : report.perParameter) {
    std::string flags;
    if (p.lowSaturated) flags += "low>=bound ";
    if (p.highSaturated) flags += "high>=bound ";
    if (p.island) flags += "island ";
    std::snprintf(buf, sizeof buf, "%-*s %8.3f %8.3f %9.1f  %s\n", static_cast<int>(width), p.name.c_str(), p.low,
                  p.high, p.margin_percent(), flags.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "critical: %s %s%.1f%%\n", report.criticalParameter.c_str(),
                report.unbounded ? ">= " : "", report.criticalMarginPercent);
  out << buf;
  return out.str();
}

bool behavioral_passes(const BehavioralTarget& target, const CellTimings& timings) {
  BehavioralCircuit circuit;
  try {
    circuit = target.build(timings);
  } catch (const CompositionError&) {
    return false;
  }
  for (const auto& schedule : target.schedules) {
    const auto sym = symbols_from_schedule(schedule);
    const auto expected = run_oracle(target.kind, sym.symbols);
    SimTime last;
    for (const auto& e : schedule) last = std::max(last, e.time);
    const auto result = simulate(circuit, schedule, last + SimTime::from_fs(200000));
    std::vector<SimTime> observed;
    for (const auto& e : result.outputs)
      if (e.port == "out") observed.push_back(e.time);
    if (!compare_trace(expected, observed, sym.clockTimes, target.window).pass) return false;
  }
  return true;
}

MarginSpec behavioral_margin_spec(const BehavioralTarget& target) {
  std::vector<std::string> keys = target.keys;
  if (keys.empty()) {
    for (const auto& [key, ps] : target.nominal.as_ps())
      if (key != "mcg" || target.kind != OracleKind::NDRO) keys.push_back(key);
  }
  MarginSpec spec;
  const auto nominalPs = target.nominal.as_ps();
  for (const auto& key : keys) {
    auto it = nominalPs.find(key);
    if (it == nominalPs.end()) throw MarginError("unknown timing parameter '" + key + "'");
    spec.parameters.push_back({key, it->second});
  }
  spec.pass = [target, keys](const std::vector<double>& values) {
    CellTimings t = target.nominal;
    for (std::size_t k = 0; k < keys.size(); ++k) t.set(keys[k], values[k]);
    return behavioral_passes(target, t);
  };
  return spec;
}

namespace {

std::map<std::string, int> slip_counts(const FlatNetlist& net, const AnalogTarget& target) {
  TransientConfig cfg;
  if (target.dt > 0.0) cfg.dt = target.dt;
  if (target.tstop > 0.0) cfg.tstop = target.tstop;
  const auto r = run_transient(net, cfg);
  std::map<std::string, int> counts;
  for (const auto& name : target.watch) counts[upper(name)] = 0;
  for (const auto& e : r.events)
    if (auto it = counts.find(e.junction); it != counts.end()) ++it->second;
  return counts;
}

}  // namespace

MarginSpec analog_margin_spec(const AnalogTarget& given) {
  AnalogTarget target = given;
  if (target.watch.empty()) {
    for (const auto& e : target.netlist.elements)
      if (e.kind == ElementKind::Junction) target.watch.push_back(e.name);
  }
  for (const auto& w : target.watch) {
    const Element* e = target.netlist.find(w);
    if (!e || e->kind != ElementKind::Junction) throw MarginError("watched element '" + w + "' is not a junction");
  }
  const auto golden = slip_counts(target.netlist, target);

  MarginSpec spec;
  std::vector<std::size_t> elementIndex;
  for (std::size_t k = 0; k < target.netlist.elements.size(); ++k) {
    const auto& e = target.netlist.elements[k];
    if (!target.only.empty() && std::find(target.only.begin(), target.only.end(), e.name) == target.only.end())
      continue;
    if (e.kind == ElementKind::Junction) {
      spec.parameters.push_back({e.name, target.netlist.icrit_of(e)});
      elementIndex.push_back(k);
    } else if (e.kind == ElementKind::Inductor) {
      spec.parameters.push_back({e.name, e.value});
      elementIndex.push_back(k);
    }
  }
  spec.pass = [target, golden, elementIndex](const std::vector<double>& values) {
    FlatNetlist net = target.netlist;
    for (std::size_t p = 0; p < elementIndex.size(); ++p) {
      auto& e = net.elements[elementIndex[p]];
      if (e.kind == ElementKind::Inductor) {
        e.value = values[p];
      } else {
        // A private model per junction keeps capacitance fixed while icrit moves.
        JJModel m = net.model_of(e);
        m.icrit = values[p] / e.area;
        m.name = e.model + "#" + e.name;
        e.model = m.name;
        net.models[m.name] = m;
      }
    }
    try {
      return slip_counts(net, target) == golden;
    } catch (const ConvergenceError&) {
      return false;
    }
  };
  return spec;
}

}  // namespace sfq
