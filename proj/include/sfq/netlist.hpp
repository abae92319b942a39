#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sfq {

inline constexpr const char* kGround = "0";

/// Raised by the netlist front end. Carries the 1-based source line when known.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Raised when subcircuit elaboration fails (recursion, arity, unknown definition).
class ElaborationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JJModel {
  std::string name;
  double icrit = 0.0;             // A
  double cap = 0.0;               // F
  std::optional<double> rn;       // ohm, intrinsic normal resistance
  std::optional<double> r0;       // ohm, subgap resistance
  bool capDefaulted = false;      // cap derived from icrit
};

/// Junction capacitance assumed when a model card omits cap: 0.7 fF per uA.
inline constexpr double kDefaultCapPerAmp = 0.7e-15 / 1e-6;

struct DcSource {
  double value = 0.0;
};
struct PwlSource {
  std::vector<std::pair<double, double>> points;  // (s, A), strictly increasing in time
};
/// Triangle pulse starting at t0, peaking at t0 + width/2, back to zero at t0 + width.
struct PulseSource {
  double t0 = 0.0;
  double amplitude = 0.0;
  double width = 0.0;
};
using SourceSpec = std::variant<DcSource, PwlSource, PulseSource>;

double source_value(const SourceSpec& src, double t);

enum class ElementKind { Junction, Inductor, Resistor, CurrentSource };

struct Element {
  ElementKind kind = ElementKind::Resistor;
  std::string name;  // upper-cased, e.g. "B1"
  std::string nplus;
  std::string nminus;
  double value = 0.0;  // henries for L, ohms for R; unused otherwise
  std::string model;   // junctions only
  double area = 1.0;   // junctions only
  SourceSpec source;   // current sources only
  int line = 0;
};

struct Instance {
  std::string name;  // "X1"
  std::vector<std::string> nodes;
  std::string subckt;
  int line = 0;
};

struct SubcircuitDef {
  std::string name;
  std::vector<std::string> ports;
  std::vector<Element> elements;
  std::vector<Instance> instances;
};

struct TranSpec {
  double step = 0.0;
  double stop = 0.0;
  double start = 0.0;
};

struct Probe {
  enum class Kind { NodeVoltage, JunctionPhase, ElementCurrent };
  Kind kind = Kind::NodeVoltage;
  std::string target;
};

struct Netlist {
  std::string title;
  std::vector<Element> elements;
  std::vector<Instance> instances;
  std::map<std::string, JJModel> models;
  std::map<std::string, SubcircuitDef> subcircuits;
  std::vector<TranSpec> trans;
  std::vector<Probe> probes;
};

/// Single-scope netlist after subcircuit expansion. Element and node names of
/// expanded instances are prefixed with the instance path ("X1.B2", "x1.3").
struct FlatNetlist {
  std::string title;
  std::vector<Element> elements;
  std::map<std::string, JJModel> models;
  std::optional<TranSpec> tran;
  std::vector<Probe> probes;

  const Element* find(std::string_view name) const;
  const JJModel& model_of(const Element& junction) const;
  /// Effective critical current of a junction (model icrit times area).
  double icrit_of(const Element& junction) const;
};

/// Parses a numeric literal with an optional engineering suffix
/// (f p n u m k meg) and optional trailing unit letters.
/// The result is the correctly rounded decimal value, so "2.28p" == 2.28e-12.
std::optional<double> parse_value(std::string_view text);

Netlist parse_netlist(std::string_view text);
Netlist read_netlist_file(const std::string& path);

/// Canonical text form; parse_netlist(to_text(n)) reproduces n.
std::string to_text(const Netlist& netlist);

FlatNetlist flatten(const Netlist& netlist);

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string code;  // "dangling-node", "floating-junction", ...
  std::string message;
};

std::vector<Diagnostic> lint(const Netlist& netlist);
bool has_errors(const std::vector<Diagnostic>& diags);
std::string to_string(const Diagnostic& d);

std::string upper(std::string_view s);
std::string lower(std::string_view s);

}  // namespace sfq
