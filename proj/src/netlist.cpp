#include "musa/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <queue>
#include <sstream>

namespace musa::netlist {

std::string_view gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Nand: return "NAND";
    case GateKind::Or: return "OR";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buf: return "BUF";
  }
  return "?";
}

NetId Netlist::net(const std::string& name) const {
  auto it = net_ids.find(name);
  if (it == net_ids.end()) throw Error(Errc::UndrivenNet, "unknown net: " + name);
  return it->second;
}

bool Netlist::operator==(const Netlist& other) const {
  auto gate_eq = [](const Gate& a, const Gate& b) {
    return a.kind == b.kind && a.inputs == b.inputs && a.output == b.output;
  };
  if (name != other.name || net_names != other.net_names || inputs != other.inputs ||
      outputs != other.outputs || gates.size() != other.gates.size() ||
      dffs.size() != other.dffs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (!gate_eq(gates[i], other.gates[i])) return false;
  }
  for (std::size_t i = 0; i < dffs.size(); ++i) {
    if (dffs[i].data != other.dffs[i].data || dffs[i].state != other.dffs[i].state) return false;
  }
  return true;
}

NetlistBuilder::NetlistBuilder(std::string name) { n_.name = std::move(name); }

NetId NetlistBuilder::net(const std::string& name) {
  auto it = n_.net_ids.find(name);
  if (it != n_.net_ids.end()) return it->second;
  NetId id = static_cast<NetId>(n_.net_names.size());
  n_.net_names.push_back(name);
  n_.net_ids.emplace(name, id);
  return id;
}

bool NetlistBuilder::has_net(const std::string& name) const {
  return n_.net_ids.count(name) != 0;
}

void NetlistBuilder::add_input(NetId id) { n_.inputs.push_back(id); }
void NetlistBuilder::add_output(NetId id) { n_.outputs.push_back(id); }

void NetlistBuilder::add_gate(GateKind kind, std::vector<NetId> inputs, NetId output) {
  n_.gates.push_back(Gate{kind, std::move(inputs), output});
}

void NetlistBuilder::add_dff(NetId data, NetId state) { n_.dffs.push_back(Dff{data, state}); }

Netlist NetlistBuilder::finalize() {
  Netlist n = std::move(n_);
  const std::size_t nnets = n.net_names.size();

  n.drivers.assign(nnets, Driver{});
  auto set_driver = [&](NetId id, Driver d) {
    if (n.drivers[id].kind != Driver::Kind::None) {
      throw Error(Errc::MultiplyDrivenNet, "net driven more than once: " + n.net_names[id]);
    }
    n.drivers[id] = d;
  };
  for (NetId id : n.inputs) set_driver(id, Driver{Driver::Kind::PrimaryInput, 0});
  for (uint32_t i = 0; i < n.gates.size(); ++i) {
    set_driver(n.gates[i].output, Driver{Driver::Kind::Gate, i});
  }
  for (uint32_t i = 0; i < n.dffs.size(); ++i) {
    set_driver(n.dffs[i].state, Driver{Driver::Kind::Dff, i});
  }
  for (NetId id = 0; id < nnets; ++id) {
    if (n.drivers[id].kind == Driver::Kind::None) {
      throw Error(Errc::UndrivenNet, "net has no driver: " + n.net_names[id]);
    }
  }

  for (const Gate& g : n.gates) {
    std::size_t arity = g.inputs.size();
    bool unary = g.kind == GateKind::Not || g.kind == GateKind::Buf;
    if ((unary && arity != 1) || (!unary && arity < 2)) {
      throw Error(Errc::SyntaxError,
                  std::string("bad arity for ") + std::string(gate_kind_name(g.kind)) + " gate " +
                      n.net_names[g.output]);
    }
  }

  n.fanouts.assign(nnets, {});
  for (uint32_t i = 0; i < n.gates.size(); ++i) {
    for (uint32_t p = 0; p < n.gates[i].inputs.size(); ++p) {
      n.fanouts[n.gates[i].inputs[p]].push_back(PinRef{PinRef::Kind::GateInput, i, p});
    }
  }
  for (uint32_t i = 0; i < n.dffs.size(); ++i) {
    n.fanouts[n.dffs[i].data].push_back(PinRef{PinRef::Kind::DffData, i, 0});
  }

  n.schedule = levelize(n);
  return n;
}

std::vector<uint32_t> levelize(const Netlist& n) {
  const std::size_t ngates = n.gates.size();
  std::vector<uint32_t> pending(ngates, 0);
  // Gate consumers of each gate-driven net.
  std::vector<std::vector<uint32_t>> consumers(ngates);
  std::vector<uint32_t> driver_gate(n.net_names.size(), UINT32_MAX);
  for (uint32_t i = 0; i < ngates; ++i) driver_gate[n.gates[i].output] = i;
  for (uint32_t i = 0; i < ngates; ++i) {
    for (NetId in : n.gates[i].inputs) {
      uint32_t dg = driver_gate[in];
      if (dg != UINT32_MAX) {
        consumers[dg].push_back(i);
        ++pending[i];
      }
    }
  }
  std::priority_queue<uint32_t, std::vector<uint32_t>, std::greater<>> ready;
  for (uint32_t i = 0; i < ngates; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<uint32_t> schedule;
  schedule.reserve(ngates);
  while (!ready.empty()) {
    uint32_t g = ready.top();
    ready.pop();
    schedule.push_back(g);
    for (uint32_t c : consumers[g]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (schedule.size() != ngates) {
    for (uint32_t i = 0; i < ngates; ++i) {
      if (pending[i] != 0) {
        throw Error(Errc::CombinationalCycle,
                    "combinational cycle through net " + n.net_names[n.gates[i].output]);
      }
    }
  }
  return schedule;
}

namespace {

struct BenchLine {
  enum class Kind { Input, Output, Gate, Dff } kind;
  std::string target;
  std::string gate_kind;
  std::vector<std::string> args;
  int lineno;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class BenchScanner {
public:
  BenchScanner(const std::string& line, int lineno) : s_(line), lineno_(lineno) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool eof() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) {
      throw Error(Errc::SyntaxError, std::string("expected `") + c + "`", lineno_);
    }
    ++pos_;
  }
  std::string ident() {
    skip_ws();
    if (pos_ >= s_.size() || !is_ident_start(s_[pos_])) {
      throw Error(Errc::SyntaxError, "expected identifier", lineno_);
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

private:
  const std::string& s_;
  std::size_t pos_ = 0;
  int lineno_;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Netlist parse_bench(const std::string& text) {
  std::vector<BenchLine> lines;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string circuit_name = "bench";
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      // `# name: x` comments name the circuit (written by serialize_bench).
      std::string comment = line.substr(hash + 1);
      auto key = comment.find("name:");
      if (key != std::string::npos) {
        std::string v = comment.substr(key + 5);
        while (!v.empty() && v.front() == ' ') v.erase(v.begin());
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.pop_back();
        if (!v.empty()) circuit_name = v;
      }
      line = line.substr(0, hash);
    }
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;

    BenchScanner sc(line, lineno);
    std::string first = sc.ident();
    std::string first_up = upper(first);
    if ((first_up == "INPUT" || first_up == "OUTPUT") && sc.peek() == '(') {
      sc.expect('(');
      std::string id = sc.ident();
      sc.expect(')');
      if (!sc.eof()) throw Error(Errc::SyntaxError, "trailing text after port declaration", lineno);
      lines.push_back(BenchLine{first_up == "INPUT" ? BenchLine::Kind::Input : BenchLine::Kind::Output,
                                id, {}, {}, lineno});
      continue;
    }
    sc.expect('=');
    std::string kind = sc.ident();
    sc.expect('(');
    std::vector<std::string> args;
    args.push_back(sc.ident());
    while (sc.peek() == ',') {
      sc.expect(',');
      args.push_back(sc.ident());
    }
    sc.expect(')');
    if (!sc.eof()) throw Error(Errc::SyntaxError, "trailing text after gate", lineno);
    std::string kind_up = upper(kind);
    if (kind_up == "DFF") {
      if (args.size() != 1) throw Error(Errc::SyntaxError, "DFF takes exactly one input", lineno);
      lines.push_back(BenchLine{BenchLine::Kind::Dff, first, kind_up, args, lineno});
    } else {
      lines.push_back(BenchLine{BenchLine::Kind::Gate, first, kind_up, args, lineno});
    }
  }

  NetlistBuilder b(circuit_name);
  std::vector<std::string> pending_outputs;
  std::vector<int> output_lines;
  // First pass declares nets in source order so ids follow the text.
  for (const BenchLine& l : lines) {
    b.net(l.target);
    for (const auto& a : l.args) b.net(a);
  }
  std::vector<std::string> declared_inputs;
  for (const BenchLine& l : lines) {
    switch (l.kind) {
      case BenchLine::Kind::Input:
        b.add_input(b.net(l.target));
        declared_inputs.push_back(l.target);
        break;
      case BenchLine::Kind::Output:
        pending_outputs.push_back(l.target);
        output_lines.push_back(l.lineno);
        break;
      case BenchLine::Kind::Dff:
        b.add_dff(b.net(l.args[0]), b.net(l.target));
        break;
      case BenchLine::Kind::Gate: {
        GateKind k;
        if (l.gate_kind == "AND") k = GateKind::And;
        else if (l.gate_kind == "NAND") k = GateKind::Nand;
        else if (l.gate_kind == "OR") k = GateKind::Or;
        else if (l.gate_kind == "NOR") k = GateKind::Nor;
        else if (l.gate_kind == "XOR") k = GateKind::Xor;
        else if (l.gate_kind == "XNOR") k = GateKind::Xnor;
        else if (l.gate_kind == "NOT") k = GateKind::Not;
        else if (l.gate_kind == "BUF") k = GateKind::Buf;
        else throw Error(Errc::UnknownGateType, "unknown gate type: " + l.gate_kind, l.lineno);
        std::vector<NetId> ins;
        ins.reserve(l.args.size());
        for (const auto& a : l.args) ins.push_back(b.net(a));
        bool unary = k == GateKind::Not || k == GateKind::Buf;
        if ((unary && ins.size() != 1) || (!unary && ins.size() < 2)) {
          throw Error(Errc::SyntaxError,
                      "bad arity for " + l.gate_kind + " (got " + std::to_string(ins.size()) + ")",
                      l.lineno);
        }
        b.add_gate(k, std::move(ins), b.net(l.target));
        break;
      }
    }
  }
  for (std::size_t i = 0; i < pending_outputs.size(); ++i) {
    const std::string& o = pending_outputs[i];
    if (std::find(declared_inputs.begin(), declared_inputs.end(), o) != declared_inputs.end()) {
      throw Error(Errc::SyntaxError,
                  "net `" + o + "` is both INPUT and OUTPUT; observe it through a BUF",
                  output_lines[i]);
    }
    b.add_output(b.net(o));
  }
  return b.finalize();
}

std::string serialize_bench(const Netlist& n) {
  std::ostringstream out;
  out << "# name: " << n.name << "\n";
  for (NetId id : n.inputs) out << "INPUT(" << n.net_names[id] << ")\n";
  for (NetId id : n.outputs) out << "OUTPUT(" << n.net_names[id] << ")\n";
  for (const Dff& d : n.dffs) {
    out << n.net_names[d.state] << " = DFF(" << n.net_names[d.data] << ")\n";
  }
  for (const Gate& g : n.gates) {
    out << n.net_names[g.output] << " = " << gate_kind_name(g.kind) << "(";
    for (std::size_t i = 0; i < g.inputs.size(); ++i) {
      if (i) out << ", ";
      out << n.net_names[g.inputs[i]];
    }
    out << ")\n";
  }
  return out.str();
}

uint8_t eval_gate(GateKind kind, const uint8_t* values, const std::vector<NetId>& pins) {
  switch (kind) {
    case GateKind::Not:
      return values[pins[0]] ^ 1u;
    case GateKind::Buf:
      return values[pins[0]];
    case GateKind::And:
    case GateKind::Nand: {
      uint8_t v = 1;
      for (NetId p : pins) v &= values[p];
      return kind == GateKind::Nand ? v ^ 1u : v;
    }
    case GateKind::Or:
    case GateKind::Nor: {
      uint8_t v = 0;
      for (NetId p : pins) v |= values[p];
      return kind == GateKind::Nor ? v ^ 1u : v;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      uint8_t v = 0;
      for (NetId p : pins) v ^= values[p];
      return kind == GateKind::Xnor ? v ^ 1u : v;
    }
  }
  return 0;
}

Simulator::Simulator(const Netlist& n) : n_(n) { reset(); }

void Simulator::reset() {
  values_.assign(n_.net_names.size(), 0);
  state_.assign(n_.dffs.size(), 0);
}

BitVec Simulator::step(const BitVec& input) {
  if (input.size() != n_.inputs.size()) {
    throw Error(Errc::WidthMismatch,
                "input vector has " + std::to_string(input.size()) + " bits, netlist has " +
                    std::to_string(n_.inputs.size()) + " inputs");
  }
  for (std::size_t i = 0; i < input.size(); ++i) values_[n_.inputs[i]] = input[i] & 1u;
  for (std::size_t i = 0; i < n_.dffs.size(); ++i) values_[n_.dffs[i].state] = state_[i];
  for (uint32_t gi : n_.schedule) {
    const Gate& g = n_.gates[gi];
    values_[g.output] = eval_gate(g.kind, values_.data(), g.inputs);
  }
  BitVec out(n_.outputs.size());
  for (std::size_t i = 0; i < n_.outputs.size(); ++i) out[i] = values_[n_.outputs[i]];
  for (std::size_t i = 0; i < n_.dffs.size(); ++i) state_[i] = values_[n_.dffs[i].data];
  return out;
}

std::vector<BitVec> Simulator::run(const testgen::VectorSequence& seq) {
  std::vector<BitVec> out;
  out.reserve(seq.vectors.size());
  for (const auto& v : seq.vectors) out.push_back(step(v));
  return out;
}

std::vector<BitVec> good_simulate(const Netlist& n, const testgen::VectorSequence& seq) {
  Simulator sim(n);
  return sim.run(seq);
}

}  // namespace musa::netlist
