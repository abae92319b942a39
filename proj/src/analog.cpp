#include "sfq/analog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace sfq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Niobium gap voltage; selects between r0 (below) and rn (above) when both are given.
constexpr double kGapVoltage = 2.8e-3;

struct JunctionRec {
  int a, b;
  double ic, cap;
  std::optional<double> rn, r0;

  double conductance(double v) const {
    if (rn && r0) return std::abs(v) < kGapVoltage ? 1.0 / *r0 : 1.0 / *rn;
    if (rn) return 1.0 / *rn;
    if (r0) return 1.0 / *r0;
    return 0.0;
  }
};

struct TwoTerminal {
  int a, b;
  double value;
};

struct SourceRec {
  int a, b;
  const SourceSpec* src;
};

struct State {
  Eigen::VectorXd v;
  std::vector<double> phi;
  std::vector<double> icap;
  std::vector<double> il;
};

struct SlipTracker {
  int level = 0;  // net slips, with hysteresis
  int emitted = 0;
};

class Engine {
public:
  Engine(const FlatNetlist& flat, const TransientConfig& cfg) : cfg_(cfg) {
    std::unordered_map<std::string, int> index;
    auto node = [&](const std::string& n) -> int {
      if (n == kGround) return -1;
      auto [it, inserted] = index.try_emplace(n, static_cast<int>(nodes_.size()));
      if (inserted) nodes_.push_back(n);
      return it->second;
    };
    for (const auto& e : flat.elements) {
      const int a = node(e.nplus);
      const int b = node(e.nminus);
      switch (e.kind) {
        case ElementKind::Junction: {
          const auto& m = flat.model_of(e);
          junctions_.push_back({a, b, m.icrit * e.area, m.cap * e.area,
                                m.rn ? std::optional<double>(*m.rn / e.area) : std::nullopt,
                                m.r0 ? std::optional<double>(*m.r0 / e.area) : std::nullopt});
          junctionNames_.push_back(e.name);
          break;
        }
        case ElementKind::Inductor:
          inductors_.push_back({a, b, e.value});
          inductorNames_.push_back(e.name);
          break;
        case ElementKind::Resistor:
          resistors_.push_back({a, b, 1.0 / e.value});
          break;
        case ElementKind::CurrentSource:
          sources_.push_back({a, b, &e.source});
          break;
      }
    }
    check_structure(flat);

    dt_ = cfg.dt.value_or(flat.tran ? flat.tran->step : kDefaultStep);
    if (cfg.tstop) {
      tstop_ = *cfg.tstop;
    } else if (flat.tran) {
      tstop_ = flat.tran->stop;
    } else {
      throw std::invalid_argument("no .tran directive and no tstop given");
    }
    if (!(dt_ > 0.0) || !(tstop_ > 0.0)) throw std::invalid_argument("dt and tstop must be positive");
    if (!(cfg.newtonAbsTolV > 0.0) || !(cfg.newtonAbsTolI > 0.0))
      throw std::invalid_argument("Newton tolerances must be positive");
  }

  TransientResult run() {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    State s{Eigen::VectorXd::Zero(n), std::vector<double>(junctions_.size(), 0.0),
            std::vector<double>(junctions_.size(), 0.0), std::vector<double>(inductors_.size(), 0.0)};
    jac_.resize(n, n);
    res_.resize(n);
    trackers_.assign(junctions_.size(), {});

    TransientResult out;
    auto& wf = out.waveform;
    wf.nodes = nodes_;
    wf.junctions = junctionNames_;
    wf.inductors = inductorNames_;
    for (const auto& j : junctions_) wf.junctionTerminals.emplace_back(j.a, j.b);

    const auto steps = static_cast<long>(std::llround(tstop_ / dt_));
    wf.times.reserve(static_cast<std::size_t>(steps) + 1);
    record(wf, 0.0, s);
    for (long k = 0; k < steps; ++k) {
      const double t0 = static_cast<double>(k) * dt_;
      const double t1 = static_cast<double>(k + 1) * dt_;
      advance(s, t0, t1, 0, out);
      record(wf, t1, s);
    }
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const PhaseSlipEvent& x, const PhaseSlipEvent& y) { return x.time < y.time; });
    return out;
  }

private:
  void check_structure(const FlatNetlist& flat) {
    std::vector<int> parent(nodes_.size() + 1);
    std::iota(parent.begin(), parent.end(), 0);
    const int ground = static_cast<int>(nodes_.size());
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto id = [&](int n) { return n < 0 ? ground : n; };
    auto join = [&](int a, int b) { parent[find(id(a))] = find(id(b)); };
    for (const auto& j : junctions_) join(j.a, j.b);
    for (const auto& l : inductors_) join(l.a, l.b);
    for (const auto& r : resistors_) join(r.a, r.b);
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      if (find(static_cast<int>(k)) != find(ground))
        throw StructuralError("node " + nodes_[k] + " has no conductive path to ground");
    (void)flat;
  }

  // Advances s from t0 to t1, halving down to dt/64 on Newton failure or when a
  // junction phase moves by more than pi in one step.
  void advance(State& s, double t0, double t1, int depth, TransientResult& out) {
    State trial = s;
    const bool converged = newton(trial, s, t0, t1);
    if (converged && resolved(s, trial)) {
      detect_slips(s, trial, t0, t1, out.events);
      s = std::move(trial);
      return;
    }
    if (depth >= 6) {
      std::ostringstream msg;
      if (converged) msg << "junction phase advances more than pi per step at t=" << t1 * 1e12 << " ps";
      else msg << "Newton iteration did not converge at t=" << t1 * 1e12 << " ps";
      throw ConvergenceError(t1, msg.str());
    }
    ++out.halvedSteps;
    const double mid = 0.5 * (t0 + t1);
    advance(s, t0, mid, depth + 1, out);
    advance(s, mid, t1, depth + 1, out);
  }

  static bool resolved(const State& prev, const State& next) {
    for (std::size_t k = 0; k < prev.phi.size(); ++k)
      if (std::abs(next.phi[k] - prev.phi[k]) > std::numbers::pi) return false;
    return true;
  }

  static void stamp(Eigen::MatrixXd& J, int a, int b, double g) {
    if (a >= 0) J(a, a) += g;
    if (b >= 0) J(b, b) += g;
    if (a >= 0 && b >= 0) {
      J(a, b) -= g;
      J(b, a) -= g;
    }
  }
  static void inject(Eigen::VectorXd& F, int a, int b, double i) {
    if (a >= 0) F(a) += i;
    if (b >= 0) F(b) -= i;
  }
  static double across(const Eigen::VectorXd& v, int a, int b) {
    return (a >= 0 ? v(a) : 0.0) - (b >= 0 ? v(b) : 0.0);
  }

  // Trapezoidal companion models; the unknowns are the node voltages at t1.
  bool newton(State& next, const State& prev, double t0, double t1) {
    const double h = t1 - t0;
    const double kphi = h / (2.0 * kReducedFluxQuantum);
    for (int iter = 0; iter < cfg_.maxNewtonIters; ++iter) {
      jac_.setZero();
      res_.setZero();
      for (const auto& r : resistors_) {
        stamp(jac_, r.a, r.b, r.value);
        inject(res_, r.a, r.b, r.value * across(next.v, r.a, r.b));
      }
      for (std::size_t k = 0; k < inductors_.size(); ++k) {
        const auto& l = inductors_[k];
        const double g = h / (2.0 * l.value);
        const double i = prev.il[k] + g * (across(next.v, l.a, l.b) + across(prev.v, l.a, l.b));
        stamp(jac_, l.a, l.b, g);
        inject(res_, l.a, l.b, i);
      }
      for (std::size_t k = 0; k < junctions_.size(); ++k) {
        const auto& j = junctions_[k];
        const double v = across(next.v, j.a, j.b);
        const double vp = across(prev.v, j.a, j.b);
        const double phi = prev.phi[k] + kphi * (v + vp);
        const double gc = 2.0 * j.cap / h;
        const double gn = j.conductance(v);
        const double i = j.ic * std::sin(phi) + gn * v + gc * (v - vp) - prev.icap[k];
        stamp(jac_, j.a, j.b, j.ic * std::cos(phi) * kphi + gn + gc);
        inject(res_, j.a, j.b, i);
      }
      for (const auto& src : sources_) inject(res_, src.a, src.b, source_value(*src.src, t1));

      lu_.compute(jac_);
      const Eigen::VectorXd delta = lu_.solve(-res_);
      if (!delta.allFinite()) {
        std::ostringstream msg;
        msg << "singular circuit matrix at t=" << t1 * 1e12 << " ps";
        throw StructuralError(msg.str());
      }
      next.v += delta;
      const double dv = delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0;
      const double di = res_.size() ? res_.cwiseAbs().maxCoeff() : 0.0;
      if (dv < cfg_.newtonAbsTolV && di < cfg_.newtonAbsTolI) {
        for (std::size_t k = 0; k < inductors_.size(); ++k) {
          const auto& l = inductors_[k];
          next.il[k] = prev.il[k] + h / (2.0 * l.value) * (across(next.v, l.a, l.b) + across(prev.v, l.a, l.b));
        }
        for (std::size_t k = 0; k < junctions_.size(); ++k) {
          const auto& j = junctions_[k];
          const double v = across(next.v, j.a, j.b);
          const double vp = across(prev.v, j.a, j.b);
          next.phi[k] = prev.phi[k] + kphi * (v + vp);
          next.icap[k] = 2.0 * j.cap / h * (v - vp) - prev.icap[k];
        }
        return true;
      }
    }
    return false;
  }

  void detect_slips(const State& prev, const State& next, double t0, double t1,
                    std::vector<PhaseSlipEvent>& events) {
    const double first = cfg_.pulseDetectThreshold;
    for (std::size_t k = 0; k < junctions_.size(); ++k) {
      auto& tr = trackers_[k];
      const double p0 = prev.phi[k];
      const double p1 = next.phi[k];
      for (;;) {
        const double up = first + kTwoPi * tr.level;
        const double down = up - kTwoPi - std::numbers::pi;
        if (p1 >= up && p1 > p0) {
          const double w = (up - p0) / (p1 - p0);
          const double t = t0 + std::clamp(w, 0.0, 1.0) * (t1 - t0);
          events.push_back({junctionNames_[k], t, tr.emitted++});
          ++tr.level;
        } else if (p1 <= down) {
          --tr.level;
        } else {
          break;
        }
      }
    }
  }

  void record(Waveform& wf, double t, const State& s) const {
    wf.times.push_back(t);
    wf.voltages.emplace_back(s.v.data(), s.v.data() + s.v.size());
    wf.phases.push_back(s.phi);
    wf.currents.push_back(s.il);
  }

  TransientConfig cfg_;
  double dt_ = kDefaultStep;
  double tstop_ = 0.0;
  std::vector<std::string> nodes_;
  std::vector<JunctionRec> junctions_;
  std::vector<std::string> junctionNames_;
  std::vector<TwoTerminal> inductors_;
  std::vector<std::string> inductorNames_;
  std::vector<TwoTerminal> resistors_;
  std::vector<SourceRec> sources_;
  std::vector<SlipTracker> trackers_;
  Eigen::MatrixXd jac_;
  Eigen::VectorXd res_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

int index_of(const std::vector<std::string>& names, const std::string& key) {
  auto it = std::find(names.begin(), names.end(), key);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);  // [-pi, pi]
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace

int Waveform::node_index(const std::string& node) const { return index_of(nodes, lower(node)); }
int Waveform::junction_index(const std::string& name) const { return index_of(junctions, upper(name)); }
int Waveform::inductor_index(const std::string& name) const { return index_of(inductors, upper(name)); }

double Waveform::node_voltage(std::size_t sample, int node) const {
  return node < 0 ? 0.0 : voltages[sample][static_cast<std::size_t>(node)];
}

double Waveform::junction_voltage(std::size_t sample, int junction) const {
  const auto [a, b] = junctionTerminals[static_cast<std::size_t>(junction)];
  return node_voltage(sample, a) - node_voltage(sample, b);
}

CircuitState Waveform::state_at(std::size_t sample) const {
  CircuitState s;
  s.time = times.at(sample);
  for (std::size_t k = 0; k < nodes.size(); ++k) s.nodeVoltages[nodes[k]] = voltages[sample][k];
  for (std::size_t k = 0; k < junctions.size(); ++k) s.junctionPhases[junctions[k]] = phases[sample][k];
  for (std::size_t k = 0; k < inductors.size(); ++k) s.inductorCurrents[inductors[k]] = currents[sample][k];
  return s;
}

TransientResult run_transient(const FlatNetlist& flat, const TransientConfig& cfg) {
  Engine engine(flat, cfg);
  return engine.run();
}

double pulse_area(const Waveform& wf, const std::string& junction, double t1, double t2) {
  const int j = wf.junction_index(junction);
  if (j < 0) throw std::invalid_argument("unknown junction '" + junction + "'");
  if (!(t1 < t2)) throw std::invalid_argument("pulse_area needs t1 < t2");
  if (wf.size() < 2 || t1 < wf.times.front() || t2 > wf.times.back() + 1e-18)
    throw std::invalid_argument("pulse_area window outside the simulated range");

  auto sample = [&](double t) {
    auto hi = std::lower_bound(wf.times.begin(), wf.times.end(), t);
    if (hi == wf.times.begin()) return wf.junction_voltage(0, j);
    if (hi == wf.times.end()) return wf.junction_voltage(wf.size() - 1, j);
    const auto k = static_cast<std::size_t>(hi - wf.times.begin());
    const double w = (t - wf.times[k - 1]) / (wf.times[k] - wf.times[k - 1]);
    return (1.0 - w) * wf.junction_voltage(k - 1, j) + w * wf.junction_voltage(k, j);
  };

  double area = 0.0;
  double tp = t1;
  double vp = sample(t1);
  auto k = static_cast<std::size_t>(std::upper_bound(wf.times.begin(), wf.times.end(), t1) - wf.times.begin());
  for (; k < wf.size() && wf.times[k] < t2; ++k) {
    const double v = wf.junction_voltage(k, j);
    area += 0.5 * (v + vp) * (wf.times[k] - tp);
    tp = wf.times[k];
    vp = v;
  }
  area += 0.5 * (vp + sample(t2)) * (t2 - tp);
  return area;
}

void validate_loop(const FlatNetlist& flat, const FluxoidLoop& loop) {
  if (loop.empty()) throw std::invalid_argument("empty loop");
  std::string start;
  std::string at;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Element* e = flat.find(loop[k].element);
    if (!e) throw std::invalid_argument("unknown loop element '" + loop[k].element + "'");
    if (e->kind != ElementKind::Inductor && e->kind != ElementKind::Junction)
      throw std::invalid_argument("loop element " + e->name + " is neither inductor nor junction");
    if (loop[k].orientation != 1 && loop[k].orientation != -1)
      throw std::invalid_argument("loop orientation must be +1 or -1");
    const auto& from = loop[k].orientation > 0 ? e->nplus : e->nminus;
    const auto& to = loop[k].orientation > 0 ? e->nminus : e->nplus;
    if (k == 0) {
      start = from;
    } else if (from != at) {
      throw std::invalid_argument("loop not closed: " + e->name + " does not start at node " + at);
    }
    at = to;
  }
  if (at != start) throw std::invalid_argument("loop not closed: ends at " + at + ", started at " + start);
}

double fluxoid(const FlatNetlist& flat, const CircuitState& state, const FluxoidLoop& loop) {
  validate_loop(flat, loop);
  double flux = 0.0;
  for (const auto& br : loop) {
    const Element* e = flat.find(br.element);
    if (e->kind == ElementKind::Inductor) {
      flux += br.orientation * e->value * state.inductorCurrents.at(e->name);
    } else {
      flux += br.orientation * kReducedFluxQuantum * wrap_phase(state.junctionPhases.at(e->name));
    }
  }
  return flux / kFluxQuantum;
}

long count_fluxons(const FlatNetlist& flat, const CircuitState& state, const FluxoidLoop& loop) {
  return std::lround(fluxoid(flat, state, loop));
}

std::optional<std::size_t> find_quiescent(const Waveform& wf, double from, double vmax, std::size_t run) {
  std::size_t streak = 0;
  for (std::size_t k = 0; k < wf.size(); ++k) {
    if (wf.times[k] < from) continue;
    const bool quiet = std::all_of(wf.voltages[k].begin(), wf.voltages[k].end(),
                                   [&](double v) { return std::abs(v) < vmax; });
    streak = quiet ? streak + 1 : 0;
    if (streak == run) return k + 1 - run;
  }
  return std::nullopt;
}

double storage_capacity(double loopInductance, double ic) {
  if (!(loopInductance > 0.0) || !(ic > 0.0))
    throw std::invalid_argument("storage_capacity needs positive inductance and critical current");
  return ic * loopInductance / kFluxQuantum;
}

std::vector<PhaseSlipEvent> events_on(const std::vector<PhaseSlipEvent>& events, const std::string& junction) {
  std::vector<PhaseSlipEvent> out;
  const std::string key = upper(junction);
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const PhaseSlipEvent& e) { return e.junction == key; });
  return out;
}

}  // namespace sfq
