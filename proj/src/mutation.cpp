#include "musa/mutation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <unordered_set>

namespace musa::mutation {

using mhdl::BinOp;
using mhdl::Decl;
using mhdl::DeclKind;
using mhdl::Design;
using mhdl::Expr;

std::string_view operator_name(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::LOR: return "LOR";
    case OperatorTag::VR: return "VR";
    case OperatorTag::CVR: return "CVR";
    case OperatorTag::CR: return "CR";
  }
  return "?";
}

std::optional<OperatorTag> parse_operator(std::string_view name) {
  for (OperatorTag tag : kAllOperators) {
    if (operator_name(tag) == name) return tag;
  }
  return std::nullopt;
}

std::string_view status_name(Mutant::Status s) {
  switch (s) {
    case Mutant::Status::Live: return "Live";
    case Mutant::Status::Killed: return "Killed";
    case Mutant::Status::Equivalent: return "Equivalent";
    case Mutant::Status::Unknown: return "Unknown";
  }
  return "?";
}

std::size_t MutantSet::count(OperatorTag tag) const {
  std::size_t n = 0;
  for (const Mutant& m : mutants) n += m.op == tag ? 1 : 0;
  return n;
}

std::size_t MutantSet::equivalent_count() const {
  std::size_t n = 0;
  for (const Mutant& m : mutants) n += m.status == Mutant::Status::Equivalent ? 1 : 0;
  return n;
}

std::size_t MutantSet::killed_count() const {
  std::size_t n = 0;
  for (const Mutant& m : mutants) n += m.status == Mutant::Status::Killed ? 1 : 0;
  return n;
}

namespace {

constexpr BinOp kLogicalOps[] = {BinOp::And, BinOp::Or,  BinOp::Nand,
                                 BinOp::Nor, BinOp::Xor, BinOp::Xnor};

bool is_variable(DeclKind k) {
  return k == DeclKind::In || k == DeclKind::Out || k == DeclKind::Sig;
}

/// Flat pre-order snapshot of the expression nodes; index equals node id.
struct NodeInfo {
  Expr::Kind kind = Expr::Kind::Literal;
  BinOp op = BinOp::And;
  std::string name;
  uint64_t value = 0;
  uint32_t width = 0;
};

std::vector<NodeInfo> snapshot(const Design& d) {
  std::vector<NodeInfo> nodes;
  for_each_node(d, [&](const Expr& e) {
    NodeInfo info;
    info.kind = e.kind;
    info.op = e.op;
    info.name = e.name;
    info.value = e.value;
    info.width = e.width;
    nodes.push_back(std::move(info));
  });
  return nodes;
}

bool ref_is_variable(const Design& d, const NodeInfo& n) {
  return n.kind == Expr::Kind::Ref && is_variable(d.decl(n.name).kind);
}

bool ref_is_constant(const Design& d, const NodeInfo& n) {
  return n.kind == Expr::Kind::Ref && d.decl(n.name).kind == DeclKind::Const;
}

std::vector<std::string> variable_pool(const Design& d, const std::string& self,
                                       uint32_t width) {
  std::vector<std::string> pool;
  for (const Decl& decl : d.decls) {
    if (is_variable(decl.kind) && decl.width == width && decl.name != self) {
      pool.push_back(decl.name);
    }
  }
  return pool;
}

std::vector<std::string> constant_pool(const Design& d, uint32_t width) {
  std::vector<std::string> pool;
  for (const Decl& decl : d.decls) {
    if (decl.kind == DeclKind::Const && decl.width == width) pool.push_back(decl.name);
  }
  return pool;
}

/// {0, all-ones, c+1, c-1} plus other same-width declared constants, minus
/// c itself, first occurrence kept.
std::vector<uint64_t> constant_replacements(const Design& d, uint64_t c, uint32_t width) {
  uint64_t mask = width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
  std::vector<uint64_t> values = {0, mask, (c + 1) & mask, (c - 1) & mask};
  for (const Decl& decl : d.decls) {
    if (decl.kind == DeclKind::Const && decl.width == width) values.push_back(decl.value);
  }
  std::vector<uint64_t> out;
  for (uint64_t v : values) {
    if (v == c) continue;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

/// Performs the edit in place; throws StaleMutant when the node's shape does
/// not match the recorded replacement.
void apply_replacement(Design& d, uint32_t site, const Replacement& r) {
  Expr* node = mhdl::find_node(d, site);
  if (node == nullptr) {
    throw Error(Errc::StaleMutant, "site " + std::to_string(site) + " not found");
  }
  switch (r.kind) {
    case Replacement::Kind::Operator:
      if (node->kind != Expr::Kind::Binary || !mhdl::is_logical(node->op)) {
        throw Error(Errc::StaleMutant, "site is not a logical operator");
      }
      node->op = r.op;
      return;
    case Replacement::Kind::Name:
      if (node->kind != Expr::Kind::Ref) {
        throw Error(Errc::StaleMutant, "site is not a name reference");
      }
      node->name = r.name;
      return;
    case Replacement::Kind::Value:
      if (node->kind == Expr::Kind::Literal) {
        node->value = r.value;
        return;
      }
      if (node->kind == Expr::Kind::Ref) {
        const Decl& decl = d.decl(node->name);
        if (decl.kind != DeclKind::Const) {
          throw Error(Errc::StaleMutant, "site does not reference a constant");
        }
        node->kind = Expr::Kind::Literal;
        node->value = r.value;
        node->width = decl.width;
        node->sized = true;
        node->bit_literal = false;
        node->name.clear();
        return;
      }
      throw Error(Errc::StaleMutant, "site holds no constant");
  }
}

struct Candidate {
  Replacement replacement;
  std::string payload;
};

std::vector<Candidate> candidates_for(const Design& d, OperatorTag op,
                                      const NodeInfo& node) {
  std::vector<Candidate> out;
  switch (op) {
    case OperatorTag::LOR: {
      for (BinOp alt : kLogicalOps) {
        if (alt == node.op) continue;
        Replacement r;
        r.kind = Replacement::Kind::Operator;
        r.op = alt;
        out.push_back({std::move(r), std::string(mhdl::binop_name(node.op)) + "->" +
                                         std::string(mhdl::binop_name(alt))});
      }
      return out;
    }
    case OperatorTag::VR: {
      for (const std::string& other : variable_pool(d, node.name, node.width)) {
        Replacement r;
        r.kind = Replacement::Kind::Name;
        r.name = other;
        out.push_back({std::move(r), node.name + "->" + other});
      }
      return out;
    }
    case OperatorTag::CVR: {
      for (const std::string& cname : constant_pool(d, node.width)) {
        Replacement r;
        r.kind = Replacement::Kind::Name;
        r.name = cname;
        out.push_back({std::move(r), node.name + "->" + cname});
      }
      return out;
    }
    case OperatorTag::CR: {
      uint64_t current = node.kind == Expr::Kind::Ref ? d.decl(node.name).value : node.value;
      uint32_t width = node.kind == Expr::Kind::Ref ? d.decl(node.name).width : node.width;
      for (uint64_t v : constant_replacements(d, current, width)) {
        Replacement r;
        r.kind = Replacement::Kind::Value;
        r.value = v;
        out.push_back({std::move(r), std::to_string(current) + "->" + std::to_string(v)});
      }
      return out;
    }
  }
  return out;
}

}  // namespace

std::vector<uint32_t> enumerate_sites(const Design& d, OperatorTag op) {
  std::vector<NodeInfo> nodes = snapshot(d);
  std::vector<uint32_t> sites;
  for (uint32_t id = 0; id < nodes.size(); ++id) {
    const NodeInfo& n = nodes[id];
    switch (op) {
      case OperatorTag::LOR:
        if (n.kind == Expr::Kind::Binary && mhdl::is_logical(n.op)) sites.push_back(id);
        break;
      case OperatorTag::VR:
        if (ref_is_variable(d, n) && !variable_pool(d, n.name, n.width).empty()) {
          sites.push_back(id);
        }
        break;
      case OperatorTag::CVR:
        if (ref_is_variable(d, n) && !constant_pool(d, n.width).empty()) {
          sites.push_back(id);
        }
        break;
      case OperatorTag::CR:
        if (!d.has_constants()) break;
        if (n.kind == Expr::Kind::Literal || ref_is_constant(d, n)) sites.push_back(id);
        break;
    }
  }
  return sites;
}

MutantSet generate_mutants(const Design& d, const std::vector<OperatorTag>& ops) {
  MutantSet set;
  set.design_name = d.name;
  set.design_hash = mhdl::content_hash(d);
  set.id = d.name + "-" + to_hex(set.design_hash);

  std::vector<NodeInfo> nodes = snapshot(d);
  std::unordered_set<std::string> seen;
  seen.insert(mhdl::print_mhdl(d));

  for (OperatorTag op : ops) {
    for (uint32_t site : enumerate_sites(d, op)) {
      for (Candidate& cand : candidates_for(d, op, nodes[site])) {
        Design mutated = d.clone();
        apply_replacement(mutated, site, cand.replacement);
        try {
          mhdl::validate(mutated);
        } catch (const Error&) {
          continue;  // e.g. a variable swap closed a combinational loop
        }
        if (!seen.insert(mhdl::print_mhdl(mutated)).second) continue;
        Mutant m;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "m%04zu", set.mutants.size() + 1);
        m.id = buf;
        m.op = op;
        m.site = site;
        m.replacement = std::move(cand.replacement);
        m.payload = std::move(cand.payload);
        m.design_hash = set.design_hash;
        set.mutants.push_back(std::move(m));
      }
    }
  }
  return set;
}

Design apply_mutant(const Design& d, const Mutant& m) {
  if (mhdl::content_hash(d) != m.design_hash) {
    throw Error(Errc::StaleMutant,
                "mutant " + m.id + " was generated from a different design");
  }
  Design mutated = d.clone();
  apply_replacement(mutated, m.site, m.replacement);
  mhdl::validate(mutated);
  return mutated;
}

KillOutcome kill_check(const Design& d, const Mutant& m,
                       const testgen::VectorSequence& seq) {
  if (seq.width != d.total_input_bits) {
    throw Error(Errc::WidthMismatch, "sequence width " + std::to_string(seq.width) +
                                         " does not match " +
                                         std::to_string(d.total_input_bits) + " input bits");
  }
  Design mutated = apply_mutant(d, m);
  mhdl::Evaluator orig(d);
  mhdl::Evaluator mut(mutated);
  uint32_t flat = 0;
  for (std::size_t s = 0; s < seq.segment_count(); ++s) {
    testgen::VectorSequence part = seq.segment(s);
    orig.reset();
    mut.reset();
    for (const BitVec& v : part.vectors) {
      ++flat;
      if (orig.step(v) != mut.step(v)) return {true, flat};
    }
  }
  return {};
}

namespace {

/// Stimulus counter to input vector: bit 0 of the counter drives the first
/// input bit, so counting up enumerates early inputs fastest.
BitVec vector_of(uint64_t value, uint32_t width) {
  BitVec v(width);
  for (uint32_t j = 0; j < width; ++j) {
    v[j] = static_cast<uint8_t>((value >> j) & 1u);
  }
  return v;
}

/// Runs both machines from reset; returns the 0-based step of the first
/// output difference, if any.
std::optional<std::size_t> first_difference(const Design& d, const Design& mutated,
                                            const testgen::VectorSequence& seq) {
  mhdl::Evaluator a(d);
  mhdl::Evaluator b(mutated);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (a.step(seq.vectors[t]) != b.step(seq.vectors[t])) return t;
  }
  return std::nullopt;
}

testgen::VectorSequence truncated(testgen::VectorSequence seq, std::size_t keep) {
  seq.vectors.resize(keep);
  return seq;
}

}  // namespace

Classification classify_equivalence(const Design& d, const Mutant& m,
                                    const EquivalenceConfig& cfg) {
  Design mutated = apply_mutant(d, m);
  uint32_t w = d.total_input_bits;
  Classification result;

  if (!d.sequential() && w <= cfg.comb_exhaustive_bits) {
    result.exhaustive = true;
    mhdl::Evaluator a(d);
    mhdl::Evaluator b(mutated);
    for (uint64_t value = 0; value < (uint64_t{1} << w); ++value) {
      BitVec v = vector_of(value, w);
      if (a.step(v) != b.step(v)) {
        result.verdict = Classification::Verdict::Killedable;
        testgen::VectorSequence witness;
        witness.width = w;
        witness.vectors.push_back(std::move(v));
        result.witness = std::move(witness);
        return result;
      }
    }
    result.verdict = Classification::Verdict::Equivalent;
    return result;
  }

  if (d.sequential() &&
      uint64_t{w} * cfg.seq_steps <= cfg.seq_stimulus_bits) {
    result.exhaustive = true;
    uint64_t bits = uint64_t{w} * cfg.seq_steps;
    uint64_t mask = w == 0 ? 0 : (uint64_t{1} << w) - 1;
    for (uint64_t index = 0; index < (uint64_t{1} << bits); ++index) {
      testgen::VectorSequence seq;
      seq.width = w;
      for (uint32_t j = 0; j < cfg.seq_steps; ++j) {
        uint64_t step_value = (index >> ((cfg.seq_steps - 1 - j) * w)) & mask;
        seq.vectors.push_back(vector_of(step_value, w));
      }
      if (auto t = first_difference(d, mutated, seq)) {
        result.verdict = Classification::Verdict::Killedable;
        result.witness = truncated(std::move(seq), *t + 1);
        return result;
      }
    }
    result.verdict = Classification::Verdict::Equivalent;
    return result;
  }

  uint32_t steps = d.sequential() ? cfg.seq_steps : 1;
  testgen::Prng rng(testgen::derive_seed(cfg.seed, "equivalence:" + m.id));
  for (uint32_t trial = 0; trial < cfg.budget; ++trial) {
    testgen::VectorSequence seq;
    seq.width = w;
    for (uint32_t j = 0; j < steps; ++j) seq.vectors.push_back(testgen::random_vector(w, rng));
    if (auto t = first_difference(d, mutated, seq)) {
      result.verdict = Classification::Verdict::Killedable;
      result.witness = truncated(std::move(seq), *t + 1);
      return result;
    }
  }
  result.verdict = Classification::Verdict::Unknown;
  return result;
}

void classify_all(const Design& d, MutantSet& set, const EquivalenceConfig& cfg,
                  unsigned workers) {
  std::vector<Classification::Verdict> verdicts(set.size(),
                                                Classification::Verdict::Unknown);
  parallel_for_chunks(set.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      verdicts[i] = classify_equivalence(d, set.mutants[i], cfg).verdict;
    }
  });
  for (std::size_t i = 0; i < set.size(); ++i) {
    switch (verdicts[i]) {
      case Classification::Verdict::Equivalent:
        set.mutants[i].status = Mutant::Status::Equivalent;
        break;
      case Classification::Verdict::Unknown:
        set.mutants[i].status = Mutant::Status::Unknown;
        break;
      case Classification::Verdict::Killedable:
        break;  // stays Live, the test generator's target
    }
  }
}

std::size_t KillMatrix::killed_count() const {
  std::size_t n = 0;
  for (const auto& fk : first_kill) n += fk.has_value() ? 1 : 0;
  return n;
}

KillMatrix build_kill_matrix(const Design& d, const MutantSet& set,
                             const testgen::VectorSequence& ts, unsigned workers) {
  if (!ts.empty() && ts.width != d.total_input_bits) {
    throw Error(Errc::WidthMismatch, "sequence width " + std::to_string(ts.width) +
                                         " does not match " +
                                         std::to_string(d.total_input_bits) + " input bits");
  }
  KillMatrix matrix;
  matrix.num_mutants = set.size();
  matrix.num_vectors = ts.size();
  matrix.cells.assign(matrix.num_mutants * matrix.num_vectors, 0);
  matrix.first_kill.assign(matrix.num_mutants, std::nullopt);
  if (ts.empty() || set.size() == 0) return matrix;

  // Reference outputs once; every mutant is compared against these.
  std::vector<BitVec> reference(ts.size());
  {
    mhdl::Evaluator orig(d);
    std::size_t flat = 0;
    for (std::size_t s = 0; s < ts.segment_count(); ++s) {
      testgen::VectorSequence part = ts.segment(s);
      orig.reset();
      for (const BitVec& v : part.vectors) reference[flat++] = orig.step(v);
    }
  }

  parallel_for_chunks(set.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (set.mutants[i].status == Mutant::Status::Equivalent) continue;
      Design mutated = apply_mutant(d, set.mutants[i]);
      mhdl::Evaluator mut(mutated);
      std::size_t flat = 0;
      for (std::size_t s = 0; s < ts.segment_count(); ++s) {
        testgen::VectorSequence part = ts.segment(s);
        mut.reset();
        for (const BitVec& v : part.vectors) {
          if (mut.step(v) != reference[flat]) {
            matrix.cells[i * matrix.num_vectors + flat] = 1;
            if (!matrix.first_kill[i]) {
              matrix.first_kill[i] = static_cast<uint32_t>(flat);
            }
          }
          ++flat;
        }
      }
    }
  });
  return matrix;
}

void record_kills(MutantSet& set, const KillMatrix& matrix) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!matrix.first_kill[i]) continue;
    if (set.mutants[i].status == Mutant::Status::Equivalent) continue;
    set.mutants[i].status = Mutant::Status::Killed;
    set.mutants[i].witness_index = *matrix.first_kill[i] + 1;
  }
}

void write_mutants_tsv(std::ostream& out, const MutantSet& set) {
  out << "mutant_id\toperator\tsite\tpayload\tstatus\twitness_index\n";
  for (const Mutant& m : set.mutants) {
    out << m.id << '\t' << operator_name(m.op) << '\t' << m.site << '\t' << m.payload
        << '\t' << status_name(m.status) << '\t';
    if (m.status == Mutant::Status::Killed && m.witness_index) out << *m.witness_index;
    out << '\n';
  }
}

}  // namespace musa::mutation
