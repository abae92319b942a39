#include "sfq/netlist.hpp"

#include <algorithm>
#include <unordered_map>

namespace sfq {

namespace {

struct Expander {
  const Netlist& net;
  FlatNetlist& flat;
  std::vector<std::string> stack;

  void expand(const std::vector<Element>& elements, const std::vector<Instance>& instances,
              const std::string& namePrefix, const std::string& nodePrefix,
              const std::unordered_map<std::string, std::string>& portMap) {
    auto mapNode = [&](const std::string& n) -> std::string {
      if (n == kGround) return n;
      if (auto it = portMap.find(n); it != portMap.end()) return it->second;
      return nodePrefix + n;
    };
    for (const auto& e : elements) {
      Element copy = e;
      copy.name = namePrefix + e.name;
      copy.nplus = mapNode(e.nplus);
      copy.nminus = mapNode(e.nminus);
      flat.elements.push_back(std::move(copy));
    }
    for (const auto& x : instances) {
      auto def = net.subcircuits.find(x.subckt);
      if (def == net.subcircuits.end())
        throw ElaborationError("line " + std::to_string(x.line) + ": unknown subcircuit '" + x.subckt +
                               "' for " + namePrefix + x.name);
      if (std::find(stack.begin(), stack.end(), x.subckt) != stack.end())
        throw ElaborationError("recursive subcircuit '" + x.subckt + "' instantiated by " + namePrefix + x.name);
      if (def->second.ports.size() != x.nodes.size())
        throw ElaborationError("arity mismatch: " + namePrefix + x.name + " passes " +
                               std::to_string(x.nodes.size()) + " nodes, subcircuit '" + x.subckt +
                               "' declares " + std::to_string(def->second.ports.size()));
      std::unordered_map<std::string, std::string> inner;
      for (std::size_t k = 0; k < x.nodes.size(); ++k) inner[def->second.ports[k]] = mapNode(x.nodes[k]);
      stack.push_back(x.subckt);
      expand(def->second.elements, def->second.instances, namePrefix + x.name + ".",
             nodePrefix + lower(x.name) + ".", inner);
      stack.pop_back();
    }
  }
};

}  // namespace

FlatNetlist flatten(const Netlist& net) {
  FlatNetlist flat;
  flat.title = net.title;
  flat.models = net.models;
  flat.probes = net.probes;
  if (!net.trans.empty()) flat.tran = net.trans.front();
  Expander ex{net, flat, {}};
  ex.expand(net.elements, net.instances, "", "", {});
  return flat;
}

}  // namespace sfq
