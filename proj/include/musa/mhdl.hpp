#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "musa/common.hpp"
#include "musa/netlist.hpp"
#include "musa/vectors.hpp"

namespace musa::mhdl {

enum class BinOp { And, Or, Nand, Nor, Xor, Xnor, Add, Sub, Eq, Ne, Lt, Le, Gt, Ge };

bool is_logical(BinOp op);
std::string_view binop_name(BinOp op);

/// Expression node. Widths and node ids are filled in by validation; ids
/// number the nodes in pre-order over the statement list and are the
/// addresses mutation sites refer to.
struct Expr {
  enum class Kind { Literal, Ref, Not, Binary, Select };

  Kind kind = Kind::Literal;
  uint32_t id = 0;
  uint32_t width = 0;
  int line = -1;

  uint64_t value = 0;        // Literal
  bool bit_literal = false;  // '0'/'1' form, fixed width 1
  bool sized = false;        // width known without inference
  std::string name;          // Ref
  BinOp op = BinOp::And;     // Binary
  std::unique_ptr<Expr> a;   // Not operand; Binary lhs; Select then-value
  std::unique_ptr<Expr> b;   // Binary rhs; Select else-value
  std::unique_ptr<Expr> c;   // Select condition

  std::unique_ptr<Expr> clone() const;
  bool structurally_equal(const Expr& other) const;
};

enum class DeclKind { In, Out, Sig, Const };

struct Decl {
  DeclKind kind = DeclKind::Sig;
  std::string name;
  uint32_t width = 0;
  uint64_t value = 0;  // Const only
  int line = -1;
};

/// `target <= rhs;` or `reg target <= rhs [reset value];`.
struct Statement {
  bool registered = false;
  std::string target;
  std::unique_ptr<Expr> rhs;
  uint64_t reset_value = 0;
  int line = -1;
};

struct Design {
  std::string name;
  std::vector<Decl> decls;
  std::vector<Statement> statements;

  // Derived by validate().
  std::unordered_map<std::string, uint32_t> decl_index;
  std::vector<uint32_t> comb_order;  // combinational statement indices, dependency order
  uint32_t total_input_bits = 0;
  uint32_t total_output_bits = 0;

  Design clone() const;
  bool has_decl(const std::string& n) const { return decl_index.count(n) != 0; }
  const Decl& decl(const std::string& n) const;
  bool sequential() const;
  bool has_constants() const;
  bool structurally_equal(const Design& other) const;
};

Design parse_mhdl(const std::string& text);

/// Re-derives widths, statement order, and node ids after an AST edit and
/// re-checks every design invariant. parse_mhdl calls this; mutation calls
/// it again on each candidate mutant.
void validate(Design& d);

/// Canonical source form; parsing it back yields a structurally equal
/// design. Mutated designs print the same way, which doubles as their
/// content identity for deduplication.
std::string print_mhdl(const Design& d);

/// FNV-1a over the canonical print; used to pair mutants with the design
/// they were generated from.
uint64_t content_hash(const Design& d);

/// Pre-order walk; fn sees every expression node. Mirrors the id order.
void for_each_node(const Design& d, const std::function<void(const Expr&)>& fn);
Expr* find_node(Design& d, uint32_t id);

/// Runs the design from reset. Input vectors carry the concatenated input
/// ports in declaration order, MSB first within each port; output frames
/// are laid out the same way. Matches the elaborated netlist's port order.
std::vector<BitVec> evaluate(const Design& d, const testgen::VectorSequence& seq);

/// Single-step evaluator for callers that manage their own stepping.
class Evaluator {
public:
  explicit Evaluator(const Design& d);

  void reset();
  BitVec step(const BitVec& input);

private:
  const Design& d_;
  std::vector<uint64_t> values_;  // per decl
  std::vector<uint64_t> state_;   // per registered statement
};

/// Bit-blasts the design to gates: `<name>_<i>` nets with bit 0 the LSB,
/// ripple-carry adders, borrow-chain comparators, AND-OR muxes, one DFF per
/// register bit. Inputs and outputs appear MSB first per port so the same
/// vector file drives both evaluate() and the netlist simulator.
netlist::Netlist elaborate(const Design& d);

}  // namespace musa::mhdl
