#include "sfq/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace sfq {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double source_value(const SourceSpec& src, double t) {
  if (const auto* dc = std::get_if<DcSource>(&src)) return dc->value;
  if (const auto* pulse = std::get_if<PulseSource>(&src)) {
    const double x = t - pulse->t0;
    if (x <= 0.0 || x >= pulse->width) return 0.0;
    const double half = 0.5 * pulse->width;
    return pulse->amplitude * (x < half ? x / half : (pulse->width - x) / half);
  }
  const auto& pts = std::get<PwlSource>(src).points;
  if (pts.empty()) return 0.0;
  if (t <= pts.front().first) return pts.front().second;
  if (t >= pts.back().first) return pts.back().second;
  auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

std::optional<double> parse_value(std::string_view text) {
  std::size_t i = 0;
  std::string mantissa;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) mantissa += text[i++];
  bool digits = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    mantissa += text[i++];
    digits = true;
  }
  if (i < text.size() && text[i] == '.') {
    mantissa += text[i++];
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      mantissa += text[i++];
      digits = true;
    }
  }
  if (!digits) return std::nullopt;

  long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
    if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
      const char* first = text.data() + i + 1;
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), exponent);
      if (ec != std::errc()) return std::nullopt;
      i = static_cast<std::size_t>(ptr - text.data());
    }
  }

  std::string rest = lower(text.substr(i));
  if (rest.rfind("\xc2\xb5", 0) == 0) rest = "u" + rest.substr(2);
  if (rest.rfind("meg", 0) == 0) {
    exponent += 6;
    rest.erase(0, 3);
  } else if (!rest.empty()) {
    switch (rest.front()) {
      case 'f': exponent -= 15; rest.erase(0, 1); break;
      case 'p': exponent -= 12; rest.erase(0, 1); break;
      case 'n': exponent -= 9; rest.erase(0, 1); break;
      case 'u': exponent -= 6; rest.erase(0, 1); break;
      case 'm': exponent -= 3; rest.erase(0, 1); break;
      case 'k': exponent += 3; rest.erase(0, 1); break;
      case 'g': exponent += 9; rest.erase(0, 1); break;
      case 't': exponent += 12; rest.erase(0, 1); break;
      default: break;
    }
  }
  // Anything left must be a unit name such as "h", "ohm" or "a".
  if (!std::all_of(rest.begin(), rest.end(),
                   [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }))
    return std::nullopt;

  const std::string literal = mantissa + "e" + std::to_string(exponent);
  char* end = nullptr;
  const double v = std::strtod(literal.c_str(), &end);
  if (end != literal.c_str() + literal.size()) return std::nullopt;
  return v;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  // '=' binds its neighbours: "icrit = 170u" and "icrit=170u" are the same token.
  std::string norm;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '=') {
      while (!norm.empty() && std::isspace(static_cast<unsigned char>(norm.back()))) norm.pop_back();
      norm += '=';
      while (i + 1 < line.size() && std::isspace(static_cast<unsigned char>(line[i + 1]))) ++i;
    } else if (c == '(' || c == ')' || c == ',') {
      norm += ' ';
    } else {
      norm += c;
    }
  }
  std::vector<std::string> tokens;
  std::istringstream in(norm);
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  return tokens;
}

std::string node_name(const std::string& tok) {
  std::string n = lower(tok);
  if (n == "gnd") return kGround;
  return n;
}

double value_or_throw(const std::string& tok, int line, const char* what) {
  auto v = parse_value(tok);
  if (!v) throw ParseError(line, std::string("malformed ") + what + " '" + tok + "'");
  return *v;
}

double positive_or_throw(const std::string& tok, int line, const char* what) {
  const double v = value_or_throw(tok, line, what);
  if (!(v > 0.0)) throw ParseError(line, std::string("non-positive ") + what + " '" + tok + "'");
  return v;
}

SourceSpec parse_source(const std::vector<std::string>& tok, std::size_t at, int line) {
  if (at >= tok.size()) throw ParseError(line, "current source needs a value");
  const std::string kind = lower(tok[at]);
  if (kind == "dc") {
    if (tok.size() != at + 2) throw ParseError(line, "dc source takes exactly one value");
    return DcSource{value_or_throw(tok[at + 1], line, "source value")};
  }
  if (kind == "pwl") {
    const std::size_t n = tok.size() - at - 1;
    if (n == 0 || n % 2 != 0) throw ParseError(line, "pwl needs (time value) pairs");
    PwlSource pwl;
    for (std::size_t k = at + 1; k < tok.size(); k += 2) {
      const double t = value_or_throw(tok[k], line, "pwl time");
      const double v = value_or_throw(tok[k + 1], line, "pwl value");
      if (!pwl.points.empty() && !(t > pwl.points.back().first))
        throw ParseError(line, "pwl times must be strictly increasing");
      if (t < 0.0) throw ParseError(line, "pwl time must be non-negative");
      pwl.points.emplace_back(t, v);
    }
    return pwl;
  }
  if (kind == "pulse") {
    if (tok.size() != at + 4) throw ParseError(line, "pulse takes (t0 amplitude width)");
    PulseSource p;
    p.t0 = value_or_throw(tok[at + 1], line, "pulse start");
    p.amplitude = value_or_throw(tok[at + 2], line, "pulse amplitude");
    p.width = positive_or_throw(tok[at + 3], line, "pulse width");
    if (p.t0 < 0.0) throw ParseError(line, "pulse start must be non-negative");
    return p;
  }
  if (tok.size() == at + 1) return DcSource{value_or_throw(tok[at], line, "source value")};
  throw ParseError(line, "unknown source form '" + tok[at] + "'");
}

struct Scope {
  std::vector<Element>* elements;
  std::vector<Instance>* instances;
  std::set<std::string> names;
};

void add_name(Scope& scope, const std::string& name, int line) {
  if (!scope.names.insert(name).second) throw ParseError(line, "duplicate element name " + name);
}

void parse_element(const std::vector<std::string>& tok, int line, Scope& scope) {
  const std::string name = upper(tok[0]);
  const char kind = name[0];
  if (kind == 'X') {
    if (tok.size() < 3) throw ParseError(line, "instance needs nodes and a subcircuit name");
    Instance inst;
    inst.name = name;
    inst.line = line;
    for (std::size_t k = 1; k + 1 < tok.size(); ++k) inst.nodes.push_back(node_name(tok[k]));
    inst.subckt = lower(tok.back());
    add_name(scope, name, line);
    scope.instances->push_back(std::move(inst));
    return;
  }
  if (tok.size() < 4) throw ParseError(line, "element " + name + " needs two nodes and a value");
  Element e;
  e.name = name;
  e.nplus = node_name(tok[1]);
  e.nminus = node_name(tok[2]);
  e.line = line;
  switch (kind) {
    case 'B': {
      e.kind = ElementKind::Junction;
      e.model = lower(tok[3]);
      for (std::size_t k = 4; k < tok.size(); ++k) {
        const std::string t = lower(tok[k]);
        if (t.rfind("area=", 0) == 0) {
          e.area = positive_or_throw(t.substr(5), line, "junction area");
        } else {
          throw ParseError(line, "unexpected junction parameter '" + tok[k] + "'");
        }
      }
      break;
    }
    case 'L':
      e.kind = ElementKind::Inductor;
      if (tok.size() != 4) throw ParseError(line, "inductor takes one value");
      e.value = positive_or_throw(tok[3], line, "inductance");
      break;
    case 'R':
      e.kind = ElementKind::Resistor;
      if (tok.size() != 4) throw ParseError(line, "resistor takes one value");
      e.value = positive_or_throw(tok[3], line, "resistance");
      break;
    case 'I':
      e.kind = ElementKind::CurrentSource;
      e.source = parse_source(tok, 3, line);
      break;
    default:
      throw ParseError(line, "unsupported element '" + tok[0] + "'");
  }
  add_name(scope, name, line);
  scope.elements->push_back(std::move(e));
}

JJModel parse_model(const std::vector<std::string>& tok, int line) {
  if (tok.size() < 3 || lower(tok[2]) != "jj")
    throw ParseError(line, "only '.model <name> jj(...)' cards are supported");
  JJModel m;
  m.name = lower(tok[1]);
  bool haveIc = false;
  bool haveCap = false;
  for (std::size_t k = 3; k < tok.size(); ++k) {
    const std::string t = lower(tok[k]);
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(line, "model parameter '" + tok[k] + "' needs a value");
    const std::string key = t.substr(0, eq);
    const std::string val = t.substr(eq + 1);
    if (key == "icrit") {
      m.icrit = positive_or_throw(val, line, "icrit");
      haveIc = true;
    } else if (key == "cap") {
      m.cap = value_or_throw(val, line, "cap");
      if (m.cap < 0.0) throw ParseError(line, "negative junction capacitance");
      haveCap = true;
    } else if (key == "rn") {
      m.rn = positive_or_throw(val, line, "rn");
    } else if (key == "r0") {
      m.r0 = positive_or_throw(val, line, "r0");
    } else {
      throw ParseError(line, "unknown model parameter '" + key + "'");
    }
  }
  if (!haveIc) throw ParseError(line, "model " + m.name + " needs icrit");
  if (!haveCap) {
    m.cap = m.icrit * kDefaultCapPerAmp;
    m.capDefaulted = true;
  }
  return m;
}

Probe parse_probe(const std::string& kind, const std::string& target, int line) {
  const std::string k = lower(kind);
  if (k == "v") return {Probe::Kind::NodeVoltage, node_name(target)};
  if (k == "phase" || k == "p") return {Probe::Kind::JunctionPhase, upper(target)};
  if (k == "i") return {Probe::Kind::ElementCurrent, upper(target)};
  throw ParseError(line, "unknown probe '" + kind + "'");
}

void check_models(const std::vector<Element>& elements, const Netlist& n) {
  for (const auto& e : elements) {
    if (e.kind == ElementKind::Junction && !n.models.contains(e.model))
      throw ParseError(e.line, "unknown model '" + e.model + "' for " + e.name);
  }
}

}  // namespace

Netlist parse_netlist(std::string_view text) {
  Netlist net;
  Scope top{&net.elements, &net.instances, {}};
  std::optional<Scope> sub;
  SubcircuitDef* current = nullptr;
  std::optional<int> subLine;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineNo = 0;
  bool seenContent = false;
  std::vector<std::pair<int, std::string>> logical;
  while (std::getline(in, raw)) {
    ++lineNo;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (raw[first] == '*' || raw[first] == '#') {
      if (!seenContent && net.title.empty()) {
        auto t = raw.substr(first + 1);
        const auto b = t.find_first_not_of(" \t");
        net.title = b == std::string::npos ? "" : t.substr(b);
      }
      seenContent = true;
      continue;
    }
    seenContent = true;
    std::string body = raw.substr(first);
    if (const auto hash = body.find('#'); hash != std::string::npos) body.erase(hash);
    if (body[0] == '+' && !logical.empty()) {
      logical.back().second += " " + body.substr(1);
      continue;
    }
    logical.emplace_back(lineNo, body);
  }

  for (const auto& [line, body] : logical) {
    const auto tok = tokenize(body);
    if (tok.empty()) continue;
    const std::string head = lower(tok[0]);
    if (head[0] != '.') {
      parse_element(tok, line, current ? *sub : top);
      continue;
    }
    if (head == ".model") {
      auto m = parse_model(tok, line);
      if (net.models.contains(m.name)) throw ParseError(line, "duplicate model " + m.name);
      net.models.emplace(m.name, std::move(m));
    } else if (head == ".subckt") {
      if (current) throw ParseError(line, "nested .subckt definitions are not supported");
      if (tok.size() < 2) throw ParseError(line, ".subckt needs a name");
      SubcircuitDef def;
      def.name = lower(tok[1]);
      for (std::size_t k = 2; k < tok.size(); ++k) def.ports.push_back(node_name(tok[k]));
      if (net.subcircuits.contains(def.name)) throw ParseError(line, "duplicate subcircuit " + def.name);
      current = &net.subcircuits.emplace(def.name, std::move(def)).first->second;
      sub.emplace(Scope{&current->elements, &current->instances, {}});
      subLine = line;
    } else if (head == ".ends") {
      if (!current) throw ParseError(line, ".ends without .subckt");
      current = nullptr;
      sub.reset();
    } else if (head == ".tran") {
      if (tok.size() < 3 || tok.size() > 4) throw ParseError(line, ".tran takes <step> <stop> [<start>]");
      TranSpec tr;
      tr.step = positive_or_throw(tok[1], line, "tran step");
      tr.stop = positive_or_throw(tok[2], line, "tran stop");
      if (tok.size() == 4) tr.start = value_or_throw(tok[3], line, "tran start");
      if (tr.start < 0.0 || !(tr.start < tr.stop)) throw ParseError(line, ".tran needs 0 <= start < stop");
      if (!(tr.step < tr.stop)) throw ParseError(line, ".tran needs step < stop");
      net.trans.push_back(tr);
    } else if (head == ".print") {
      if (tok.size() < 3 || (tok.size() - 1) % 2 != 0)
        throw ParseError(line, ".print takes v(node), phase(B) or i(elem) probes");
      for (std::size_t k = 1; k < tok.size(); k += 2) net.probes.push_back(parse_probe(tok[k], tok[k + 1], line));
    } else if (head == ".end") {
      break;
    } else {
      throw ParseError(line, "unsupported directive '" + tok[0] + "'");
    }
  }
  if (current) throw ParseError(*subLine, "missing .ends for subcircuit " + current->name);
  if (net.elements.empty() && net.instances.empty()) throw ParseError(0, "no elements");

  check_models(net.elements, net);
  for (const auto& [name, def] : net.subcircuits) check_models(def.elements, net);
  return net;
}

Netlist read_netlist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

namespace {

std::string fmt_value(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void print_element(std::ostream& out, const Element& e) {
  out << e.name << ' ' << e.nplus << ' ' << e.nminus << ' ';
  switch (e.kind) {
    case ElementKind::Junction:
      out << e.model;
      if (e.area != 1.0) out << " area=" << fmt_value(e.area);
      break;
    case ElementKind::Inductor:
    case ElementKind::Resistor:
      out << fmt_value(e.value);
      break;
    case ElementKind::CurrentSource:
      if (const auto* dc = std::get_if<DcSource>(&e.source)) {
        out << "dc " << fmt_value(dc->value);
      } else if (const auto* p = std::get_if<PulseSource>(&e.source)) {
        out << "pulse(" << fmt_value(p->t0) << ' ' << fmt_value(p->amplitude) << ' '
            << fmt_value(p->width) << ')';
      } else {
        out << "pwl(";
        const auto& pts = std::get<PwlSource>(e.source).points;
        for (std::size_t k = 0; k < pts.size(); ++k)
          out << (k ? " " : "") << fmt_value(pts[k].first) << ' ' << fmt_value(pts[k].second);
        out << ')';
      }
      break;
  }
  out << '\n';
}

void print_instance(std::ostream& out, const Instance& x) {
  out << x.name;
  for (const auto& n : x.nodes) out << ' ' << n;
  out << ' ' << x.subckt << '\n';
}

}  // namespace

std::string to_text(const Netlist& n) {
  std::ostringstream out;
  out << "* " << n.title << '\n';
  for (const auto& [name, m] : n.models) {
    out << ".model " << name << " jj(icrit=" << fmt_value(m.icrit);
    if (!m.capDefaulted) out << ", cap=" << fmt_value(m.cap);
    if (m.rn) out << ", rn=" << fmt_value(*m.rn);
    if (m.r0) out << ", r0=" << fmt_value(*m.r0);
    out << ")\n";
  }
  for (const auto& [name, def] : n.subcircuits) {
    out << ".subckt " << name;
    for (const auto& p : def.ports) out << ' ' << p;
    out << '\n';
    for (const auto& e : def.elements) print_element(out, e);
    for (const auto& x : def.instances) print_instance(out, x);
    out << ".ends\n";
  }
  for (const auto& e : n.elements) print_element(out, e);
  for (const auto& x : n.instances) print_instance(out, x);
  for (const auto& t : n.trans) {
    out << ".tran " << fmt_value(t.step) << ' ' << fmt_value(t.stop);
    if (t.start != 0.0) out << ' ' << fmt_value(t.start);
    out << '\n';
  }
  if (!n.probes.empty()) {
    out << ".print";
    for (const auto& p : n.probes) {
      const char* k = p.kind == Probe::Kind::NodeVoltage     ? "v"
                      : p.kind == Probe::Kind::JunctionPhase ? "phase"
                                                             : "i";
      out << ' ' << k << '(' << p.target << ')';
    }
    out << '\n';
  }
  return out.str();
}

const Element* FlatNetlist::find(std::string_view name) const {
  const std::string key = upper(name);
  for (const auto& e : elements)
    if (e.name == key) return &e;
  return nullptr;
}

const JJModel& FlatNetlist::model_of(const Element& junction) const {
  auto it = models.find(junction.model);
  if (it == models.end()) throw std::invalid_argument("unknown model '" + junction.model + "'");
  return it->second;
}

double FlatNetlist::icrit_of(const Element& junction) const {
  return model_of(junction).icrit * junction.area;
}

std::string to_string(const Diagnostic& d) {
  return std::string(d.severity == Severity::Error ? "error" : "warning") + " [" + d.code + "] " +
         d.message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace sfq
