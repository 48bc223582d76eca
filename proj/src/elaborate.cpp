#include "musa/mhdl.hpp"

namespace musa::mhdl {

namespace {

using netlist::GateKind;
using netlist::kNoNet;
using netlist::NetId;

GateKind logical_gate(BinOp op) {
  switch (op) {
    case BinOp::And: return GateKind::And;
    case BinOp::Or: return GateKind::Or;
    case BinOp::Nand: return GateKind::Nand;
    case BinOp::Nor: return GateKind::Nor;
    case BinOp::Xor: return GateKind::Xor;
    case BinOp::Xnor: return GateKind::Xnor;
    default: throw Error(Errc::Internal, "not a logical operator");
  }
}

/// Bit-blasts one design. Bit vectors are indexed by significance, so
/// bits[0] is the LSB and drives net `<name>_0`.
class Elaborator {
public:
  explicit Elaborator(const Design& d) : d_(d), b_(d.name) {}

  netlist::Netlist run() {
    for (const Decl& decl : d_.decls) {
      if (decl.kind == DeclKind::Const) continue;
      for (uint32_t i = decl.width; i-- > 0;) {
        NetId id = b_.net(bit_name(decl.name, i));
        if (decl.kind == DeclKind::In) {
          b_.add_input(id);
          if (first_input_ == kNoNet) first_input_ = id;
        } else if (decl.kind == DeclKind::Out) {
          b_.add_output(id);
        }
      }
    }
    for (const Statement& s : d_.statements) {
      Bits target = decl_nets(s.target);
      if (!s.registered) {
        compile_into(*s.rhs, target);
        continue;
      }
      Bits data = compile(*s.rhs);
      for (uint32_t i = 0; i < target.size(); ++i) {
        if (((s.reset_value >> i) & 1u) == 0) {
          b_.add_dff(data[i], target[i]);
        } else {
          // The flop itself resets to 0, so a bit that must reset to 1 is
          // stored inverted and re-inverted on the way out.
          NetId nd = b_.net(bit_name(s.target, i) + "__nd");
          NetId nq = b_.net(bit_name(s.target, i) + "__n");
          b_.add_gate(GateKind::Not, {data[i]}, nd);
          b_.add_dff(nd, nq);
          b_.add_gate(GateKind::Not, {nq}, target[i]);
        }
      }
    }
    return b_.finalize();
  }

private:
  using Bits = std::vector<NetId>;

  static std::string bit_name(const std::string& name, uint32_t i) {
    return name + "_" + std::to_string(i);
  }

  NetId temp() { return b_.net("__t" + std::to_string(temp_count_++)); }

  NetId gate(GateKind kind, std::vector<NetId> ins) {
    NetId out = temp();
    b_.add_gate(kind, std::move(ins), out);
    return out;
  }

  NetId const0() {
    if (const0_ != kNoNet) return const0_;
    const0_ = b_.net("__const0");
    if (first_input_ != kNoNet) {
      b_.add_gate(GateKind::Xor, {first_input_, first_input_}, const0_);
    } else {
      b_.add_dff(const0_, const0_);  // resets to 0 and feeds itself
    }
    return const0_;
  }

  NetId const1() {
    if (const1_ != kNoNet) return const1_;
    NetId zero = const0();
    const1_ = b_.net("__const1");
    b_.add_gate(GateKind::Not, {zero}, const1_);
    return const1_;
  }

  Bits const_bits(uint64_t value, uint32_t width) {
    Bits out(width);
    for (uint32_t i = 0; i < width; ++i) {
      out[i] = ((value >> i) & 1u) ? const1() : const0();
    }
    return out;
  }

  Bits decl_nets(const std::string& name) {
    const Decl& decl = d_.decl(name);
    if (decl.kind == DeclKind::Const) return const_bits(decl.value, decl.width);
    Bits out(decl.width);
    for (uint32_t i = 0; i < decl.width; ++i) out[i] = b_.net(bit_name(name, i));
    return out;
  }

  Bits compile(const Expr& e) {
    if (e.kind == Expr::Kind::Literal) return const_bits(e.value, e.width);
    if (e.kind == Expr::Kind::Ref) return decl_nets(e.name);
    Bits out(e.width);
    for (uint32_t i = 0; i < e.width; ++i) out[i] = temp();
    compile_structural(e, out);
    return out;
  }

  void compile_into(const Expr& e, const Bits& out) {
    if (e.kind == Expr::Kind::Literal || e.kind == Expr::Kind::Ref) {
      Bits src = compile(e);
      for (uint32_t i = 0; i < out.size(); ++i) {
        b_.add_gate(GateKind::Buf, {src[i]}, out[i]);
      }
      return;
    }
    compile_structural(e, out);
  }

  void compile_structural(const Expr& e, const Bits& out) {
    switch (e.kind) {
      case Expr::Kind::Not: {
        Bits a = compile(*e.a);
        for (uint32_t i = 0; i < out.size(); ++i) {
          b_.add_gate(GateKind::Not, {a[i]}, out[i]);
        }
        return;
      }
      case Expr::Kind::Binary: {
        Bits a = compile(*e.a);
        Bits b = compile(*e.b);
        binary_into(e.op, a, b, out);
        return;
      }
      case Expr::Kind::Select: {
        Bits a = compile(*e.a);
        NetId cond = compile(*e.c)[0];
        Bits b = compile(*e.b);
        NetId ncond = gate(GateKind::Not, {cond});
        for (uint32_t i = 0; i < out.size(); ++i) {
          NetId then_bit = gate(GateKind::And, {cond, a[i]});
          NetId else_bit = gate(GateKind::And, {ncond, b[i]});
          b_.add_gate(GateKind::Or, {then_bit, else_bit}, out[i]);
        }
        return;
      }
      default:
        throw Error(Errc::Internal, "unexpected expression kind in elaboration");
    }
  }

  void binary_into(BinOp op, const Bits& a, const Bits& b, const Bits& out) {
    if (is_logical(op)) {
      GateKind kind = logical_gate(op);
      for (uint32_t i = 0; i < out.size(); ++i) {
        b_.add_gate(kind, {a[i], b[i]}, out[i]);
      }
      return;
    }
    switch (op) {
      case BinOp::Add: add_into(a, b, out); return;
      case BinOp::Sub: sub_into(a, b, out); return;
      case BinOp::Eq: reduce_into(GateKind::Xnor, GateKind::And, a, b, out[0]); return;
      case BinOp::Ne: reduce_into(GateKind::Xor, GateKind::Or, a, b, out[0]); return;
      case BinOp::Ge: ge_into(a, b, out[0]); return;
      case BinOp::Le: ge_into(b, a, out[0]); return;
      case BinOp::Lt: {
        NetId ge = temp();
        ge_into(a, b, ge);
        b_.add_gate(GateKind::Not, {ge}, out[0]);
        return;
      }
      case BinOp::Gt: {
        NetId le = temp();
        ge_into(b, a, le);
        b_.add_gate(GateKind::Not, {le}, out[0]);
        return;
      }
      default:
        throw Error(Errc::Internal, "unexpected binary operator in elaboration");
    }
  }

  void add_into(const Bits& a, const Bits& b, const Bits& out) {
    uint32_t w = static_cast<uint32_t>(out.size());
    b_.add_gate(GateKind::Xor, {a[0], b[0]}, out[0]);
    if (w == 1) return;
    NetId carry = gate(GateKind::And, {a[0], b[0]});
    for (uint32_t i = 1; i < w; ++i) {
      NetId p = gate(GateKind::Xor, {a[i], b[i]});
      b_.add_gate(GateKind::Xor, {p, carry}, out[i]);
      if (i + 1 == w) break;
      NetId g = gate(GateKind::And, {a[i], b[i]});
      NetId t = gate(GateKind::And, {p, carry});
      carry = gate(GateKind::Or, {g, t});
    }
  }

  // a - b as a + ~b + 1; the implicit carry-in folds into the bit-0 cells.
  void sub_into(const Bits& a, const Bits& b, const Bits& out) {
    uint32_t w = static_cast<uint32_t>(out.size());
    Bits nb(w);
    for (uint32_t i = 0; i < w; ++i) nb[i] = gate(GateKind::Not, {b[i]});
    b_.add_gate(GateKind::Xnor, {a[0], nb[0]}, out[0]);
    if (w == 1) return;
    NetId carry = gate(GateKind::Or, {a[0], nb[0]});
    for (uint32_t i = 1; i < w; ++i) {
      NetId p = gate(GateKind::Xor, {a[i], nb[i]});
      b_.add_gate(GateKind::Xor, {p, carry}, out[i]);
      if (i + 1 == w) break;
      NetId g = gate(GateKind::And, {a[i], nb[i]});
      NetId t = gate(GateKind::And, {p, carry});
      carry = gate(GateKind::Or, {g, t});
    }
  }

  /// a >= b computed as the carry out of a + ~b + 1.
  void ge_into(const Bits& a, const Bits& b, NetId out) {
    uint32_t w = static_cast<uint32_t>(a.size());
    Bits nb(w);
    for (uint32_t i = 0; i < w; ++i) nb[i] = gate(GateKind::Not, {b[i]});
    if (w == 1) {
      b_.add_gate(GateKind::Or, {a[0], nb[0]}, out);
      return;
    }
    NetId carry = gate(GateKind::Or, {a[0], nb[0]});
    for (uint32_t i = 1; i < w; ++i) {
      NetId p = gate(GateKind::Xor, {a[i], nb[i]});
      NetId g = gate(GateKind::And, {a[i], nb[i]});
      NetId t = gate(GateKind::And, {p, carry});
      if (i + 1 == w) {
        b_.add_gate(GateKind::Or, {g, t}, out);
      } else {
        carry = gate(GateKind::Or, {g, t});
      }
    }
  }

  /// Per-bit `pair_kind`, then one n-ary `fold_kind` over the pair outputs.
  void reduce_into(GateKind pair_kind, GateKind fold_kind, const Bits& a, const Bits& b,
                   NetId out) {
    uint32_t w = static_cast<uint32_t>(a.size());
    if (w == 1) {
      b_.add_gate(pair_kind, {a[0], b[0]}, out);
      return;
    }
    std::vector<NetId> pairs(w);
    for (uint32_t i = 0; i < w; ++i) pairs[i] = gate(pair_kind, {a[i], b[i]});
    b_.add_gate(fold_kind, std::move(pairs), out);
  }

  const Design& d_;
  netlist::NetlistBuilder b_;
  NetId first_input_ = kNoNet;
  NetId const0_ = kNoNet;
  NetId const1_ = kNoNet;
  uint32_t temp_count_ = 0;
};

}  // namespace

netlist::Netlist elaborate(const Design& d) { return Elaborator(d).run(); }

}  // namespace musa::mhdl
