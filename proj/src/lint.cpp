#include <map>
#include <set>

#include "sfq/netlist.hpp"

namespace sfq {

namespace {

class DisjointSet {
public:
  std::size_t id(const std::string& node) {
    auto [it, inserted] = index_.try_emplace(node, parent_.size());
    if (inserted) parent_.push_back(parent_.size());
    return it->second;
  }
  std::size_t root(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void join(const std::string& a, const std::string& b) {
    const auto ra = root(id(a));
    const auto rb = root(id(b));
    if (ra != rb) parent_[ra] = rb;
  }
  bool connected(const std::string& a, const std::string& b) { return root(id(a)) == root(id(b)); }

private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
};

void add(std::vector<Diagnostic>& out, Severity s, std::string code, std::string msg) {
  out.push_back({s, std::move(code), std::move(msg)});
}

}  // namespace

std::vector<Diagnostic> lint(const Netlist& net) {
  std::vector<Diagnostic> out;
  FlatNetlist flat;
  try {
    flat = flatten(net);
  } catch (const ElaborationError& e) {
    add(out, Severity::Error, "elaboration", e.what());
    return out;
  }

  std::map<std::string, int> terminals;
  DisjointSet dc;
  dc.id(kGround);
  for (const auto& e : flat.elements) {
    ++terminals[e.nplus];
    ++terminals[e.nminus];
    if (e.nplus == e.nminus) add(out, Severity::Warning, "shorted-element", e.name + " has both terminals on node " + e.nplus);
    if (e.kind != ElementKind::CurrentSource) dc.join(e.nplus, e.nminus);
  }

  for (const auto& [node, count] : terminals) {
    if (node == kGround) continue;
    if (count < 2) add(out, Severity::Error, "dangling-node", "node " + node + " has a single connection");
    if (!dc.connected(node, kGround))
      add(out, Severity::Error, "floating-node", "node " + node + " has no conductive path to ground");
  }

  std::set<std::string> usedModels;
  for (const auto& e : flat.elements) {
    if (e.kind == ElementKind::Junction) {
      usedModels.insert(e.model);
      if (!dc.connected(e.nplus, kGround) || !dc.connected(e.nminus, kGround))
        add(out, Severity::Error, "floating-junction", e.name + " has no DC bias path to ground");
    }
    if (e.kind == ElementKind::CurrentSource) {
      if (const auto* d = std::get_if<DcSource>(&e.source); d && d->value != 0.0)
        add(out, Severity::Warning, "hard-step", e.name + " is a DC step at t=0; ramp it with pwl");
      if (const auto* p = std::get_if<PwlSource>(&e.source);
          p && p->points.front().first == 0.0 && p->points.front().second != 0.0)
        add(out, Severity::Warning, "hard-step", e.name + " starts non-zero at t=0");
    }
  }
  for (const auto& [name, m] : net.models)
    if (!usedModels.contains(name)) add(out, Severity::Warning, "unused-model", "model " + name + " is never referenced");

  if (net.trans.empty()) add(out, Severity::Warning, "missing-tran", "no .tran directive");
  if (net.trans.size() > 1) add(out, Severity::Warning, "multiple-tran", "only the first .tran is used");

  for (const auto& p : flat.probes) {
    if (p.kind == Probe::Kind::NodeVoltage) {
      if (p.target != kGround && !terminals.contains(p.target))
        add(out, Severity::Error, "unknown-probe", "v(" + p.target + ") names no node");
    } else {
      const Element* e = flat.find(p.target);
      if (!e || (p.kind == Probe::Kind::JunctionPhase && e->kind != ElementKind::Junction))
        add(out, Severity::Error, "unknown-probe", "probe target " + p.target + " is not a valid element");
    }
  }
  return out;
}

}  // namespace sfq
