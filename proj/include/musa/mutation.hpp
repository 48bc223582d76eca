#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "musa/common.hpp"
#include "musa/mhdl.hpp"
#include "musa/vectors.hpp"

namespace musa::mutation {

enum class OperatorTag { LOR, VR, CVR, CR };

/// Generation order; sampling's tie order (CR first) is separate.
inline constexpr std::array<OperatorTag, 4> kAllOperators = {
    OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR};

std::string_view operator_name(OperatorTag tag);
std::optional<OperatorTag> parse_operator(std::string_view name);

/// The edit a mutant performs at its site node.
struct Replacement {
  enum class Kind {
    Operator,  // Binary node gets a different logical operator (LOR)
    Name,      // Ref node points at a different declaration (VR, CVR)
    Value,     // Literal value swap, or Ref-to-constant collapsed to a literal (CR)
  };
  Kind kind = Kind::Operator;
  mhdl::BinOp op = mhdl::BinOp::And;
  std::string name;
  uint64_t value = 0;
};

struct Mutant {
  enum class Status { Live, Killed, Equivalent, Unknown };

  std::string id;  // "m0001", ordinal in generation order
  OperatorTag op = OperatorTag::LOR;
  uint32_t site = 0;  // AST node id in the origin design
  Replacement replacement;
  std::string payload;  // human-readable edit, e.g. "and->or", "a->C", "5->0"
  uint64_t design_hash = 0;

  Status status = Status::Live;
  std::optional<uint32_t> witness_index;  // 1-based TS vector index when Killed
};

std::string_view status_name(Mutant::Status s);

struct MutantSet {
  std::string design_name;
  uint64_t design_hash = 0;
  std::string id;  // "<design>-<hash hex>", the provenance tag carried by TS files
  std::vector<Mutant> mutants;

  std::size_t size() const { return mutants.size(); }
  std::size_t count(OperatorTag tag) const;
  std::size_t equivalent_count() const;
  std::size_t killed_count() const;
};

std::vector<uint32_t> enumerate_sites(const mhdl::Design& d, OperatorTag op);

/// Generates every mutant of the requested operators, in operator order and
/// site order, dropping candidates that fail re-validation (a variable swap
/// can create a combinational cycle) and duplicates (identical resulting
/// designs, first occurrence wins).
MutantSet generate_mutants(const mhdl::Design& d, const std::vector<OperatorTag>& ops);

/// Clones the design and performs the mutant's edit, re-validating the
/// result. Throws StaleMutant when the design is not the one the mutant was
/// generated from or its site no longer matches the recorded edit shape.
mhdl::Design apply_mutant(const mhdl::Design& d, const Mutant& m);

struct KillOutcome {
  bool killed = false;
  uint32_t witness = 0;  // 1-based flat vector index of the first difference
};

/// Compares original and mutant outputs over the sequence. Segmented
/// sequences restart both machines from reset at each segment boundary;
/// the witness index stays flat across segments.
KillOutcome kill_check(const mhdl::Design& d, const Mutant& m,
                       const testgen::VectorSequence& seq);

struct EquivalenceConfig {
  uint32_t comb_exhaustive_bits = 16;  // exhaustive when input bits fit
  uint32_t seq_stimulus_bits = 16;     // exhaustive when input bits x steps fit
  uint32_t seq_steps = 8;              // bounded horizon for sequential checks
  uint32_t budget = 64;                // random sequences past the limits
  uint64_t seed = 1;                   // stream base for the random fallback
};

struct Classification {
  enum class Verdict { Equivalent, Killedable, Unknown };
  Verdict verdict = Verdict::Unknown;
  std::optional<testgen::VectorSequence> witness;  // Killedable only
  bool exhaustive = false;
};

/// Bounded-exhaustive when the design fits the configured limits (ascending
/// stimulus order, so the reported witness is the smallest), otherwise
/// `budget` random sequences. Equivalent is only ever returned by the
/// exhaustive path.
Classification classify_equivalence(const mhdl::Design& d, const Mutant& m,
                                    const EquivalenceConfig& cfg);

/// Runs classify_equivalence over the whole set and records the verdicts:
/// Equivalent and Unknown stick, Killedable mutants stay Live for the test
/// generator to target. Parallel over mutants; verdicts are per-mutant, so
/// the worker count cannot change them.
void classify_all(const mhdl::Design& d, MutantSet& set, const EquivalenceConfig& cfg,
                  unsigned workers = 1);

/// Kill evidence of one vector sequence against every mutant in a set.
/// Rows follow mutant order; columns are flat vector indices. Mutants
/// already proven Equivalent keep empty rows and are not simulated.
struct KillMatrix {
  std::size_t num_mutants = 0;
  std::size_t num_vectors = 0;
  std::vector<uint8_t> cells;  // row-major
  std::vector<std::optional<uint32_t>> first_kill;  // 0-based column

  bool cell(std::size_t mutant, std::size_t t) const {
    return cells[mutant * num_vectors + t] != 0;
  }
  std::size_t killed_count() const;
};

KillMatrix build_kill_matrix(const mhdl::Design& d, const MutantSet& set,
                             const testgen::VectorSequence& ts, unsigned workers = 1);

/// Applies a matrix to the set's statuses: rows with kills become
/// Killed{first kill, 1-based}; everything else keeps its prior verdict.
void record_kills(MutantSet& set, const KillMatrix& matrix);

/// TSV columns: mutant_id, operator, site, payload, status, witness_index
/// (empty unless Killed).
void write_mutants_tsv(std::ostream& out, const MutantSet& set);

}  // namespace musa::mutation
