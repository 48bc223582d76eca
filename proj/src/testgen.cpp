#include "musa/testgen.hpp"

namespace musa::testgen {

using mhdl::Design;
using mutation::Mutant;
using mutation::MutantSet;

GreedyResult generate_validation_set(const Design& d, const MutantSet& set,
                                     const VectorSequence& candidates,
                                     const GreedyConfig& cfg) {
  if (!candidates.empty() && candidates.width != d.total_input_bits) {
    throw Error(Errc::WidthMismatch,
                "candidate width " + std::to_string(candidates.width) +
                    " does not match " + std::to_string(d.total_input_bits) +
                    " input bits");
  }

  GreedyResult result;
  result.ts.width = d.total_input_bits;
  result.ts.provenance = MutationAdequateProvenance{set.id};
  result.ts.segment_length = candidates.segment_length;

  // Mutant designs and evaluators are built once; every candidate unit is
  // replayed from reset, so the evaluators are reusable.
  std::vector<std::size_t> live;
  std::vector<mhdl::Evaluator> evals;
  std::vector<std::size_t> eval_of(set.size(), 0);
  std::vector<Design> designs;
  designs.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.mutants[i].status == Mutant::Status::Equivalent) continue;
    eval_of[i] = designs.size();
    designs.push_back(mutation::apply_mutant(d, set.mutants[i]));
    live.push_back(i);
  }
  evals.reserve(designs.size());
  for (const Design& md : designs) evals.emplace_back(md);
  mhdl::Evaluator orig(d);

  bool segmented = candidates.segment_length.has_value();
  std::size_t units = segmented ? candidates.segment_count() : candidates.size();

  std::vector<BitVec> reference;
  for (std::size_t u = 0; u < units && !live.empty(); ++u) {
    VectorSequence unit =
        segmented ? candidates.segment(u) : VectorSequence{candidates.width,
                                                           {candidates.vectors[u]},
                                                           candidates.provenance,
                                                           std::nullopt};
    if (cfg.max_ts_length != 0 &&
        result.ts.size() + unit.size() > cfg.max_ts_length) {
      break;
    }

    reference.assign(unit.size(), BitVec{});
    orig.reset();
    for (std::size_t t = 0; t < unit.size(); ++t) reference[t] = orig.step(unit.vectors[t]);

    // Which live mutants does this unit kill? The flags only depend on the
    // per-mutant runs, so chunked workers cannot change the outcome.
    std::vector<uint8_t> kills(live.size(), 0);
    parallel_for_chunks(live.size(), cfg.workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        mhdl::Evaluator& mut = evals[eval_of[live[k]]];
        mut.reset();
        for (std::size_t t = 0; t < unit.size(); ++t) {
          if (mut.step(unit.vectors[t]) != reference[t]) {
            kills[k] = 1;
            break;
          }
        }
      }
    });

    bool any = false;
    std::vector<std::size_t> survivors;
    survivors.reserve(live.size());
    for (std::size_t k = 0; k < live.size(); ++k) {
      if (kills[k]) {
        any = true;
      } else {
        survivors.push_back(live[k]);
      }
    }
    if (!any) continue;
    live.swap(survivors);
    for (const BitVec& v : unit.vectors) result.ts.append(v);
    result.kept_units.push_back(u);
  }

  result.matrix = mutation::build_kill_matrix(d, set, result.ts, cfg.workers);
  return result;
}

}  // namespace musa::testgen
