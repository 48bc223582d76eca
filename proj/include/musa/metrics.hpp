#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "musa/common.hpp"
#include "musa/faultsim.hpp"

namespace musa::metrics {

/// Killed over non-equivalent generated mutants, kept as exact counts.
struct MutationScore {
  std::size_t killed = 0;
  std::size_t generated = 0;
  std::size_t equivalent = 0;

  double value() const {
    return static_cast<double>(killed) / static_cast<double>(generated - equivalent);
  }
};

/// Throws AllEquivalent when generated == equivalent and RangeError when the
/// counts cannot come from one mutant population.
MutationScore mutation_score(std::size_t killed, std::size_t generated,
                             std::size_t equivalent);

/// Relative coverage gain at equal length:
/// 100 * (MFC(L) - RFC(L)) / RFC(L). Throws ZeroBaseline when RFC(L) is 0
/// and RangeError when either curve is shorter than L or L is 0.
double delta_fc(const faultsim::CoverageCurve& mfc, const faultsim::CoverageCurve& rfc,
                std::size_t length);

struct DeltaL {
  double percent = 0.0;
  bool lower_bound = false;  // baseline never caught up within its cap
};

/// Relative length gain at equal coverage: the baseline curve is grown until
/// it detects at least `detected` faults (the mutation TS's count at length
/// `length`), giving Lr; result 100 * (Lr - length) / Lr. When the capped
/// stream falls short the result is 100 * (cap - length) / cap, flagged.
/// Detected counts compare exactly; fractions never enter the threshold.
DeltaL delta_l(std::size_t detected, std::size_t length, faultsim::ExtendableRandomCurve& rfc);

/// The efficiency product. Report rows feed this with their rounded deltas
/// so the printed column is exactly the product of the printed factors.
double nlfce(double delta_fc_pct, double delta_l_pct);

/// The value a report's 2-decimal cell stands for (printf rounding).
double round2(double value);

/// One per-operator or per-strategy efficiency result at report precision.
struct EfficiencyRow {
  std::string circuit;
  std::string label;  // operator or strategy name
  std::optional<double> delta_fc_pct;  // nullopt: baseline coverage was zero
  double delta_l_pct = 0.0;
  std::optional<double> nlfce;
  bool lower_bound = false;
};

EfficiencyRow efficiency_row(std::string circuit, std::string label, double raw_delta_fc,
                             DeltaL dl);

/// Columns: circuit, operator, delta_fc_pct, delta_l_pct, nlfce. Lower-bound
/// and zero-baseline rows carry explanatory `#` comment lines; undefined
/// cells print NA.
void write_efficiency_tsv(std::ostream& out, const std::vector<EfficiencyRow>& rows);

struct CompareRow {
  std::string circuit;
  std::string strategy;
  std::optional<uint64_t> seed;  // nullopt marks a mean row
  std::size_t sample_size = 0;
  double ms = 0.0;  // fraction of the full mutant population
  std::optional<double> nlfce;
  bool lower_bound = false;
};

/// Columns: circuit, strategy, seed, sample_size, ms_pct, nlfce. Mean rows
/// print "mean" in the seed column.
void write_compare_tsv(std::ostream& out, const std::vector<CompareRow>& rows);

}  // namespace musa::metrics
