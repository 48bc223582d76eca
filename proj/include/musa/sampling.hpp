#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "musa/metrics.hpp"
#include "musa/mhdl.hpp"
#include "musa/mutation.hpp"
#include "musa/testgen.hpp"
#include "musa/vectors.hpp"

namespace musa::sampling {

/// Floor for operator weights; also the value substituted for operators the
/// weight table does not mention.
inline constexpr double kMinWeight = 0.01;

/// Fixed precedence for apportionment ties and group ordering.
inline constexpr std::array<mutation::OperatorTag, 4> kOperatorOrder = {
    mutation::OperatorTag::CR, mutation::OperatorTag::CVR, mutation::OperatorTag::VR,
    mutation::OperatorTag::LOR};

/// Per-operator sampling weights, typically the clamped efficiency products
/// from a study run. Lookups fall back to the floor.
class OperatorWeights {
 public:
  void set(mutation::OperatorTag op, double weight);
  double get(mutation::OperatorTag op) const;
  bool has(mutation::OperatorTag op) const;

  std::string provenance;  // where the table came from (study run or file)

 private:
  std::array<std::optional<double>, 4> weights_;
};

struct SamplePlan {
  std::size_t sample_size = 0;
  /// Per-operator quotas in precedence order; only operators present in the
  /// sampled set appear. Uniform sampling leaves this empty.
  std::vector<std::pair<mutation::OperatorTag, std::size_t>> quotas;
  std::vector<std::size_t> selected;  // mutant indices, ascending
};

/// Uniform sample of max(1, round(fraction * size)) mutants.
/// Throws EmptyMutantSet, RangeError (fraction outside (0, 1]) and ZeroSeed.
SamplePlan random_sample(const mutation::MutantSet& set, double fraction, uint64_t seed);

/// Same sample size, split across operator groups by largest-remainder
/// apportionment over the weights, quotas capped at group sizes with the
/// excess re-apportioned, then uniform within each group.
SamplePlan weighted_sample(const mutation::MutantSet& set, const OperatorWeights& weights,
                           double fraction, uint64_t seed);

/// Knobs shared by the study and comparison pipelines.
struct PipelineConfig {
  std::vector<mutation::OperatorTag> operators = {
      mutation::OperatorTag::LOR, mutation::OperatorTag::VR, mutation::OperatorTag::CVR,
      mutation::OperatorTag::CR};
  uint64_t seed = 1;  // master seed; every stream is derived from it
  std::size_t candidate_budget_factor = 64;
  uint32_t sequence_length = 8;    // stimulus segment length for sequential designs
  std::size_t max_ts_length = 0;   // 0: unlimited
  mutation::EquivalenceConfig equivalence;
  std::size_t baseline_cap = 1000;
  unsigned workers = 1;
  /// When set, fault coverage is measured on this netlist instead of the
  /// design's own elaboration. Its input count must match the design's
  /// input bits, since both consume the same vectors.
  const netlist::Netlist* target = nullptr;
};

/// Everything measured for one operator of one design.
struct OperatorStudy {
  mutation::OperatorTag op;
  mutation::MutantSet set;  // statuses filled in
  testgen::VectorSequence ts;
  std::size_t detected = 0;  // faults the TS detects on the elaborated netlist
  metrics::EfficiencyRow row;
  double weight = kMinWeight;
};

struct StudyResult {
  std::string circuit;
  std::vector<OperatorStudy> operators;  // generation order, applicable ones only
  OperatorWeights weights;
};

/// For each applicable operator: generate mutants, classify equivalence,
/// grow an adequate TS, fault-simulate it against the elaborated design and
/// score it against a matched random baseline. Weights are the efficiency
/// products clamped from below. Throws NoApplicableOperators when no
/// requested operator produces a mutant.
StudyResult operator_efficiency_study(const mhdl::Design& d, const PipelineConfig& cfg);

/// Random candidate stimulus for a design: `units` single vectors for a
/// combinational design, `units` segments of `segment_length` vectors for a
/// sequential one. A design with no inputs still gets one unit of empty
/// vectors so generation has something to keep. Both pipelines and the
/// standalone generation command build their pools through this.
testgen::VectorSequence candidate_pool(const mhdl::Design& d, std::size_t units, uint64_t seed,
                                       uint32_t segment_length);

struct StrategyRun {
  std::string strategy;
  uint64_t seed = 0;
  SamplePlan plan;
  testgen::VectorSequence ts;
  metrics::MutationScore score;  // against the full mutant population
  metrics::CompareRow row;
};

struct CompareResult {
  std::string circuit;
  mutation::MutantSet population;  // full set with statuses
  std::vector<StrategyRun> runs;   // per seed, uniform then weighted
  std::vector<metrics::CompareRow> rows;  // runs plus one mean row per strategy
};

/// For every sampling seed and both strategies: draw a sample, grow a TS
/// adequate for the sample only, then score that TS against the entire
/// mutant population (mutation score) and the fault-coverage baseline
/// (efficiency product). Both strategies share each seed's candidate pool
/// and baseline so the draw is the only difference.
CompareResult compare_strategies(const mhdl::Design& d, const OperatorWeights& weights,
                                 double fraction, const std::vector<uint64_t>& seeds,
                                 const PipelineConfig& cfg);

}  // namespace musa::sampling
