#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "musa/common.hpp"

namespace musa::testgen {

/// xorshift64* with the fixed shift triple (12, 25, 27) and the standard
/// finalizing multiplier. Identical seeds yield identical streams; the state
/// never reaches zero, so the period is 2^64 - 1.
class Prng {
public:
  explicit Prng(uint64_t seed);

  uint64_t next();
  /// Uniform draw in [0, n) via rejection sampling (no modulo bias).
  uint64_t next_below(uint64_t n);

private:
  uint64_t state_;
};

struct RandomProvenance {
  uint64_t seed = 0;
};
struct MutationAdequateProvenance {
  std::string mutant_set_id;
};
struct FileProvenance {
  std::string path;
};
using Provenance =
    std::variant<RandomProvenance, MutationAdequateProvenance, FileProvenance>;

/// Ordered test vectors over a circuit's primary inputs. Bits are MSB-first
/// within each vector. For sequential designs a sequence may be segmented:
/// each segment of `segment_length` vectors is applied from reset on its own
/// when checking mutant kills; fault simulation always consumes the flat list.
struct VectorSequence {
  uint32_t width = 0;
  std::vector<BitVec> vectors;
  Provenance provenance = RandomProvenance{};
  std::optional<uint32_t> segment_length;

  std::size_t size() const { return vectors.size(); }
  bool empty() const { return vectors.empty(); }
  std::size_t segment_count() const;
  /// Segment i as a standalone sequence (whole sequence if unsegmented).
  VectorSequence segment(std::size_t i) const;
  void append(const BitVec& v);

  std::string provenance_string() const;
};

/// Deterministic pseudo-random vectors: each vector consumes
/// ceil(width/64) fresh generator outputs, bits taken MSB-first.
VectorSequence random_vectors(uint32_t width, std::size_t n, uint64_t seed);

/// One vector drawn from an existing generator under the same consumption
/// rule, so incremental callers reproduce the random_vectors stream. A
/// width of 0 yields an empty vector and consumes nothing.
BitVec random_vector(uint32_t width, Prng& rng);

/// Text format: `width=<n>` header, one 0/1 row per vector (MSB first),
/// `#` comments. The writer records provenance and segmenting as comments
/// which the reader understands but other consumers may ignore.
VectorSequence read_vectors(std::istream& in, const std::string& origin = "<stream>");
VectorSequence read_vectors_file(const std::string& path);
void write_vectors(std::ostream& out, const VectorSequence& seq);
void write_vectors_file(const std::string& path, const VectorSequence& seq);

/// Stable seed derivation for the independent streams one run needs
/// (candidates, baseline, sampling). Never returns zero.
uint64_t derive_seed(uint64_t master, std::string_view purpose);

}  // namespace musa::testgen
