#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "musa/common.hpp"
#include "musa/vectors.hpp"

namespace musa::netlist {

using NetId = uint32_t;
constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

enum class GateKind { And, Nand, Or, Nor, Xor, Xnor, Not, Buf };

std::string_view gate_kind_name(GateKind k);

struct Gate {
  GateKind kind;
  std::vector<NetId> inputs;  // pin order preserved from source text
  NetId output = kNoNet;
};

/// q = DFF(d); resets to 0.
struct Dff {
  NetId data = kNoNet;
  NetId state = kNoNet;
};

struct Driver {
  enum class Kind { None, PrimaryInput, Gate, Dff } kind = Kind::None;
  uint32_t index = 0;  // gate or dff index
};

/// A consumer pin of a net: input pin `pin` of gate `index`, or the data pin
/// of DFF `index`. Fanout branches are identified by these references.
struct PinRef {
  enum class Kind { GateInput, DffData } kind = Kind::GateInput;
  uint32_t index = 0;
  uint32_t pin = 0;
};

/// Immutable gate-level circuit. Construction goes through parse_bench or
/// the elaborator; both call finalize(), which checks structural invariants
/// and levelizes the combinational part.
struct Netlist {
  std::string name;
  std::vector<std::string> net_names;
  std::unordered_map<std::string, NetId> net_ids;
  std::vector<NetId> inputs;
  std::vector<NetId> outputs;
  std::vector<Gate> gates;
  std::vector<Dff> dffs;

  // Derived by finalize().
  std::vector<Driver> drivers;
  std::vector<std::vector<PinRef>> fanouts;
  std::vector<uint32_t> schedule;  // gate indices in evaluation order

  NetId net(const std::string& name) const;
  const std::string& net_name(NetId id) const { return net_names[id]; }
  bool sequential() const { return !dffs.empty(); }

  bool operator==(const Netlist& other) const;
};

/// Builder used by the parser and the elaborator.
class NetlistBuilder {
public:
  explicit NetlistBuilder(std::string name);

  NetId net(const std::string& name);           // get or create
  bool has_net(const std::string& name) const;
  void add_input(NetId id);
  void add_output(NetId id);
  void add_gate(GateKind kind, std::vector<NetId> inputs, NetId output);
  void add_dff(NetId data, NetId state);

  /// Checks drivers, arities, acyclicity; computes fanouts and the gate
  /// schedule. Throws on violation.
  Netlist finalize();

private:
  Netlist n_;
};

Netlist parse_bench(const std::string& text);
std::string serialize_bench(const Netlist& n);

/// Deterministic topological order of the combinational gates (lowest gate
/// index first among ready gates). DFF outputs and primary inputs are the
/// sources. Throws CombinationalCycle naming a net on a cycle.
std::vector<uint32_t> levelize(const Netlist& n);

uint8_t eval_gate(GateKind kind, const uint8_t* values, const std::vector<NetId>& pins);

/// Stateful simulator; step() clocks DFFs after capturing outputs, so a
/// sequence may be continued across calls. good_simulate() runs from reset.
class Simulator {
public:
  explicit Simulator(const Netlist& n);

  void reset();
  BitVec step(const BitVec& input);
  std::vector<BitVec> run(const testgen::VectorSequence& seq);

private:
  const Netlist& n_;
  std::vector<uint8_t> values_;  // per net
  std::vector<uint8_t> state_;   // per dff
};

std::vector<BitVec> good_simulate(const Netlist& n, const testgen::VectorSequence& seq);

}  // namespace musa::netlist
