#pragma once

#include <cstdint>
#include <vector>

#include "musa/mhdl.hpp"
#include "musa/mutation.hpp"
#include "musa/vectors.hpp"

namespace musa::testgen {

struct GreedyConfig {
  std::size_t max_ts_length = 0;  // vector count ceiling; 0 means none
  unsigned workers = 1;
};

struct GreedyResult {
  VectorSequence ts;
  mutation::KillMatrix matrix;  // over ALL mutants, evaluated on ts
  /// Candidate units (vectors, or segments for segmented candidates) that
  /// were kept, by index in the candidate sequence.
  std::vector<std::size_t> kept_units;
};

/// Greedy scan of the candidates in order: a unit is kept iff it kills at
/// least one still-live mutant (Equivalent mutants are never targets;
/// Unknown ones remain targets but rarely fall). Segmented candidate
/// sequences are consumed segment-wise, each segment applied from reset.
/// Stops when no live mutants remain, candidates run out, or the next unit
/// would push the TS past max_ts_length.
GreedyResult generate_validation_set(const mhdl::Design& d, const mutation::MutantSet& set,
                                     const VectorSequence& candidates,
                                     const GreedyConfig& cfg = {});

}  // namespace musa::testgen
