#include "sfq/waveio.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sfq {

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto w = words(raw);
    if (!w.empty()) f(line, w);
  }
}

SimTime time_or_throw(const std::string& text, int line) {
  try {
    const SimTime t = parse_ps(text);
    if (t < SimTime{}) throw FormatError(line, "negative time '" + text + "'");
    return t;
  } catch (const std::invalid_argument& e) {
    throw FormatError(line, e.what());
  }
}

void sort_events(std::vector<PulseEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const PulseEvent& a, const PulseEvent& b) { return a.time < b.time; });
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string vcd_id(std::size_t k) {
  std::string id;
  do {
    id += static_cast<char>('!' + k % 94);
    k /= 94;
  } while (k > 0);
  return id;
}

std::string vcd_from(const std::vector<std::pair<std::int64_t, std::string>>& pulses) {
  std::set<std::string> names;
  for (const auto& [t, name] : pulses) names.insert(name);
  std::map<std::string, std::string> ids;
  std::ostringstream out;
  out << "$timescale 1fs $end\n$scope module sfqsim $end\n";
  std::size_t k = 0;
  for (const auto& n : names) {
    ids[n] = vcd_id(k++);
    out << "$var wire 1 " << ids[n] << ' ' << n << " $end\n";
  }
  out << "$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n";
  for (const auto& n : names) out << '0' << ids[n] << '\n';
  out << "$end\n";

  std::map<std::int64_t, std::vector<std::pair<char, std::string>>> changes;
  for (const auto& [t, name] : pulses) {
    changes[t].emplace_back('1', ids[name]);
    changes[t + 1].emplace_back('0', ids[name]);
  }
  for (auto& [t, list] : changes) {
    // A wire that rises and falls at one instant keeps only the rise.
    std::map<std::string, char> last;
    for (const auto& [v, id] : list) {
      auto it = last.find(id);
      if (it == last.end() || v == '1') last[id] = v;
    }
    out << '#' << t << '\n';
    for (const auto& [id, v] : last) out << v << id << '\n';
  }
  return out.str();
}

}  // namespace

PulseSchedule read_schedule(std::string_view text) {
  PulseSchedule s;
  std::vector<std::pair<int, PulseEvent>> pending;
  for_each_line(text, [&](int line, const std::vector<std::string>& w) {
    if (w[0] == "port") {
      if (w.size() != 2) throw FormatError(line, "expected 'port <name>'");
      if (std::find(s.declaredPorts.begin(), s.declaredPorts.end(), w[1]) == s.declaredPorts.end())
        s.declaredPorts.push_back(w[1]);
    } else if (w[0] == "pulse") {
      if (w.size() != 3) throw FormatError(line, "expected 'pulse <port> <time_ps>'");
      pending.push_back({line, {time_or_throw(w[2], line), w[1]}});
    } else {
      throw FormatError(line, "unknown schedule directive '" + w[0] + "'");
    }
  });
  for (auto& [line, ev] : pending) {
    if (std::find(s.declaredPorts.begin(), s.declaredPorts.end(), ev.port) == s.declaredPorts.end())
      throw FormatError(line, "pulse on undeclared port '" + ev.port + "'");
    s.events.push_back(std::move(ev));
  }
  sort_events(s.events);
  return s;
}

std::string write_schedule(const PulseSchedule& schedule) {
  std::ostringstream out;
  for (const auto& p : schedule.declaredPorts) out << "port " << p << '\n';
  out << write_events(schedule.events);
  return out.str();
}

std::string write_events(const std::vector<PulseEvent>& events) {
  std::vector<PulseEvent> sorted = events;
  sort_events(sorted);
  std::ostringstream out;
  for (const auto& e : sorted) out << "pulse " << e.port << ' ' << format_ps(e.time) << '\n';
  return out.str();
}

std::vector<PulseEvent> read_events(std::string_view text) {
  std::vector<PulseEvent> events;
  for_each_line(text, [&](int line, const std::vector<std::string>& w) {
    if (w[0] == "port") return;
    if (w[0] != "pulse" || w.size() != 3) throw FormatError(line, "expected 'pulse <port> <time_ps>'");
    events.push_back({time_or_throw(w[2], line), w[1]});
  });
  sort_events(events);
  return events;
}

std::string write_events(const std::vector<PhaseSlipEvent>& events) {
  std::vector<PhaseSlipEvent> sorted = events;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PhaseSlipEvent& a, const PhaseSlipEvent& b) { return a.time < b.time; });
  std::ostringstream out;
  for (const auto& e : sorted) out << "pulse " << e.junction << ' ' << format_ps(e.time) << '\n';
  return out.str();
}

std::string write_trace(const std::vector<TraceEntry>& trace) {
  std::ostringstream out;
  for (const auto& t : trace) out << "trace " << format_ps(t.time) << ' ' << t.cell << ' ' << t.what << '\n';
  return out.str();
}

std::string write_waveform_csv(const Waveform& wf, const std::vector<Probe>& probes, double start) {
  struct Column {
    std::string header;
    int kind;  // 0 voltage, 1 phase, 2 inductor current
    int index;
  };
  std::vector<Column> cols;
  if (probes.empty()) {
    for (std::size_t k = 0; k < wf.nodes.size(); ++k) cols.push_back({"v(" + wf.nodes[k] + ")", 0, static_cast<int>(k)});
    for (std::size_t k = 0; k < wf.junctions.size(); ++k)
      cols.push_back({"phase(" + wf.junctions[k] + ")", 1, static_cast<int>(k)});
  } else {
    for (const auto& p : probes) {
      switch (p.kind) {
        case Probe::Kind::NodeVoltage: {
          const int idx = p.target == kGround ? -1 : wf.node_index(p.target);
          if (idx < 0 && p.target != kGround) throw std::invalid_argument("no node '" + p.target + "'");
          cols.push_back({"v(" + p.target + ")", 0, idx});
          break;
        }
        case Probe::Kind::JunctionPhase: {
          const int idx = wf.junction_index(p.target);
          if (idx < 0) throw std::invalid_argument("no junction '" + p.target + "'");
          cols.push_back({"phase(" + p.target + ")", 1, idx});
          break;
        }
        case Probe::Kind::ElementCurrent: {
          const int idx = wf.inductor_index(p.target);
          if (idx < 0) throw std::invalid_argument("i(" + p.target + "): only inductor currents are recorded");
          cols.push_back({"i(" + p.target + ")", 2, idx});
          break;
        }
      }
    }
  }
  std::ostringstream out;
  out << "time_ps";
  for (const auto& c : cols) out << ',' << c.header;
  out << '\n';
  const double tol = 1e-18;
  for (std::size_t s = 0; s < wf.size(); ++s) {
    if (wf.times[s] + tol < start) continue;
    out << format_ps(wf.times[s]);
    for (const auto& c : cols) {
      double v = 0.0;
      if (c.kind == 0) v = wf.node_voltage(s, c.index);
      else if (c.kind == 1) v = wf.phases[s][static_cast<std::size_t>(c.index)];
      else v = wf.currents[s][static_cast<std::size_t>(c.index)];
      out << ',' << fmt("%.10g", v);
    }
    out << '\n';
  }
  return out.str();
}

std::string write_vcd(const std::vector<PulseEvent>& events) {
  std::vector<std::pair<std::int64_t, std::string>> pulses;
  for (const auto& e : events) pulses.emplace_back(e.time.fs(), e.port);
  return vcd_from(pulses);
}

std::string write_vcd(const std::vector<PhaseSlipEvent>& events) {
  std::vector<std::pair<std::int64_t, std::string>> pulses;
  for (const auto& e : events) pulses.emplace_back(SimTime::from_seconds(e.time).fs(), e.junction);
  return vcd_from(pulses);
}

std::string write_margin_csv(const MarginReport& report) {
  std::ostringstream out;
  out << "param,low,high,margin_pct\n";
  for (const auto& p : report.perParameter)
    out << p.name << ',' << fmt("%.4f", p.low) << ',' << fmt("%.4f", p.high) << ',' << fmt("%.2f", p.margin_percent())
        << '\n';
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace sfq
