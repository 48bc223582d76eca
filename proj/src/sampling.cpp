#include "musa/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace musa::sampling {

namespace {

constexpr std::size_t tag_index(mutation::OperatorTag op) {
  return static_cast<std::size_t>(op);
}

std::size_t sample_count(double fraction, std::size_t population) {
  auto rounded = std::llround(fraction * static_cast<double>(population));
  if (rounded < 1) return 1;
  return static_cast<std::size_t>(rounded);
}

void check_draw(const mutation::MutantSet& set, double fraction) {
  if (set.mutants.empty())
    throw Error(Errc::EmptyMutantSet, "cannot sample from an empty mutant set");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(Errc::RangeError, "sampling fraction must be in (0, 1]");
}

/// First `take` elements of a partial Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool,
                                                  std::size_t take, testgen::Prng& rng) {
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

void OperatorWeights::set(mutation::OperatorTag op, double weight) {
  weights_[tag_index(op)] = std::max(kMinWeight, weight);
}

double OperatorWeights::get(mutation::OperatorTag op) const {
  const auto& w = weights_[tag_index(op)];
  return w ? *w : kMinWeight;
}

bool OperatorWeights::has(mutation::OperatorTag op) const {
  return weights_[tag_index(op)].has_value();
}

SamplePlan random_sample(const mutation::MutantSet& set, double fraction, uint64_t seed) {
  check_draw(set, fraction);
  testgen::Prng rng(seed);
  SamplePlan plan;
  plan.sample_size = sample_count(fraction, set.size());
  std::vector<std::size_t> pool(set.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  plan.selected = draw_without_replacement(std::move(pool), plan.sample_size, rng);
  std::sort(plan.selected.begin(), plan.selected.end());
  return plan;
}

SamplePlan weighted_sample(const mutation::MutantSet& set, const OperatorWeights& weights,
                           double fraction, uint64_t seed) {
  check_draw(set, fraction);
  if (seed == 0) throw Error(Errc::ZeroSeed, "sampling seed must be nonzero");

  struct Group {
    mutation::OperatorTag tag;
    std::vector<std::size_t> members;
    long double weight = 0;
    std::size_t quota = 0;
    bool capped = false;
  };
  std::vector<Group> groups;
  for (mutation::OperatorTag tag : kOperatorOrder) {
    Group g;
    g.tag = tag;
    for (std::size_t i = 0; i < set.mutants.size(); ++i)
      if (set.mutants[i].op == tag) g.members.push_back(i);
    if (g.members.empty()) continue;
    g.weight = static_cast<long double>(weights.get(tag));
    groups.push_back(std::move(g));
  }

  SamplePlan plan;
  plan.sample_size = sample_count(fraction, set.size());

  // Largest-remainder apportionment over the uncapped groups. Whenever a
  // quota exceeds its group, the group is frozen at full size and the rest
  // of the seats are re-apportioned among the remaining groups.
  auto apportion_uncapped = [&](std::size_t seats) {
    long double total = 0;
    std::size_t uncapped = 0;
    for (const auto& g : groups)
      if (!g.capped) {
        total += g.weight;
        ++uncapped;
      }
    if (uncapped == 0) return;
    std::vector<std::pair<long double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].capped) continue;
      long double q = static_cast<long double>(seats) * groups[i].weight / total;
      auto floor_q = static_cast<std::size_t>(q);
      groups[i].quota = floor_q;
      assigned += floor_q;
      remainders.emplace_back(q - static_cast<long double>(floor_q), i);
    }
    // Ties fall back to group position, which is the fixed precedence order.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t k = 0;
    while (assigned < seats) {
      groups[remainders[k % remainders.size()].second].quota += 1;
      ++assigned;
      ++k;
    }
  };

  std::size_t fixed = 0;
  bool changed = true;
  while (changed) {
    apportion_uncapped(plan.sample_size - fixed);
    changed = false;
    for (auto& g : groups) {
      if (!g.capped && g.quota > g.members.size()) {
        g.capped = true;
        g.quota = g.members.size();
        fixed += g.quota;
        changed = true;
      }
    }
  }

  for (auto& g : groups) {
    plan.quotas.emplace_back(g.tag, g.quota);
    if (g.quota == 0) continue;
    testgen::Prng rng(
        testgen::derive_seed(seed, "quota:" + std::string(mutation::operator_name(g.tag))));
    auto picks = draw_without_replacement(g.members, g.quota, rng);
    plan.selected.insert(plan.selected.end(), picks.begin(), picks.end());
  }
  std::sort(plan.selected.begin(), plan.selected.end());
  return plan;
}

testgen::VectorSequence candidate_pool(const mhdl::Design& d, std::size_t units, uint64_t seed,
                                       uint32_t segment_length) {
  bool seq = d.sequential();
  if (units == 0) units = 1;
  if (d.total_input_bits == 0) {
    // A design without inputs has exactly one meaningful stimulus, so it
    // gets a single unit of empty vectors.
    testgen::VectorSequence s;
    s.width = 0;
    s.vectors.assign(seq ? segment_length : 1, BitVec{});
    s.provenance = testgen::RandomProvenance{seed};
    if (seq) s.segment_length = segment_length;
    return s;
  }
  std::size_t count = seq ? units * static_cast<std::size_t>(segment_length) : units;
  auto s = testgen::random_vectors(d.total_input_bits, count, seed);
  if (seq) s.segment_length = segment_length;
  return s;
}

namespace {

metrics::EfficiencyRow zero_row(const std::string& circuit, const std::string& label) {
  metrics::EfficiencyRow row;
  row.circuit = circuit;
  row.label = label;
  row.delta_fc_pct = 0.0;
  row.delta_l_pct = 0.0;
  row.nlfce = 0.0;
  return row;
}

// Coverage target for a design: its own elaboration unless the caller
// supplied an external netlist, which must accept the same vectors.
netlist::Netlist resolve_target(const mhdl::Design& d, const PipelineConfig& cfg) {
  if (cfg.target == nullptr) return mhdl::elaborate(d);
  if (cfg.target->inputs.size() != d.total_input_bits) {
    throw Error(Errc::WidthMismatch,
                "netlist " + cfg.target->name + " has " + std::to_string(cfg.target->inputs.size()) +
                    " inputs but design " + d.name + " drives " +
                    std::to_string(d.total_input_bits) + " bits");
  }
  return *cfg.target;
}

}  // namespace

StudyResult operator_efficiency_study(const mhdl::Design& d, const PipelineConfig& cfg) {
  StudyResult res;
  res.circuit = d.name;
  auto netlist = resolve_target(d, cfg);
  auto fl = faultsim::build_fault_list(netlist);

  for (mutation::OperatorTag tag : cfg.operators) {
    auto set = mutation::generate_mutants(d, {tag});
    if (set.mutants.empty()) continue;
    std::string name(mutation::operator_name(tag));

    auto eq = cfg.equivalence;
    eq.seed = testgen::derive_seed(cfg.seed, "equivalence:" + name);
    mutation::classify_all(d, set, eq, cfg.workers);

    auto candidates =
        candidate_pool(d, set.size() * cfg.candidate_budget_factor,
                        testgen::derive_seed(cfg.seed, "candidates:" + name),
                        cfg.sequence_length);
    auto greedy = testgen::generate_validation_set(d, set, candidates,
                                                   {cfg.max_ts_length, cfg.workers});
    mutation::record_kills(set, greedy.matrix);

    OperatorStudy st;
    st.op = tag;
    st.set = std::move(set);
    st.ts = std::move(greedy.ts);
    if (st.ts.empty()) {
      st.row = zero_row(d.name, name);
      st.weight = kMinWeight;
    } else {
      auto det = faultsim::fault_simulate(netlist, st.ts, fl, cfg.workers);
      st.detected = det.detected_count();
      auto curve = faultsim::coverage_curve(det, fl);
      faultsim::ExtendableRandomCurve rfc(
          netlist, fl, testgen::derive_seed(cfg.seed, "baseline:" + name),
          std::max(cfg.baseline_cap, st.ts.size()), cfg.workers);
      rfc.ensure_length(st.ts.size());
      auto dl = metrics::delta_l(st.detected, st.ts.size(), rfc);
      try {
        double raw = metrics::delta_fc(curve, rfc.realized(), st.ts.size());
        st.row = metrics::efficiency_row(d.name, name, raw, dl);
        st.weight = std::max(kMinWeight, *st.row.nlfce);
      } catch (const Error& err) {
        if (err.code() != Errc::ZeroBaseline) throw;
        st.row.circuit = d.name;
        st.row.label = name;
        st.row.delta_l_pct = metrics::round2(dl.percent);
        st.row.lower_bound = dl.lower_bound;
        st.weight = kMinWeight;
      }
    }
    res.weights.set(tag, st.weight);
    res.operators.push_back(std::move(st));
  }

  if (res.operators.empty())
    throw Error(Errc::NoApplicableOperators,
                "no requested operator applies to design `" + d.name + "`");
  res.weights.provenance = "study:" + d.name;
  return res;
}

CompareResult compare_strategies(const mhdl::Design& d, const OperatorWeights& weights,
                                 double fraction, const std::vector<uint64_t>& seeds,
                                 const PipelineConfig& cfg) {
  if (seeds.empty())
    throw Error(Errc::ConfigError, "strategy comparison needs at least one sampling seed");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(Errc::RangeError, "sampling fraction must be in (0, 1]");

  CompareResult res;
  res.circuit = d.name;
  res.population = mutation::generate_mutants(d, cfg.operators);
  if (res.population.mutants.empty())
    throw Error(Errc::EmptyMutantSet, "design yields no mutants to sample: " + d.name);

  auto eq = cfg.equivalence;
  eq.seed = testgen::derive_seed(cfg.seed, "equivalence:population");
  mutation::classify_all(d, res.population, eq, cfg.workers);

  auto netlist = resolve_target(d, cfg);
  auto fl = faultsim::build_fault_list(netlist);
  std::size_t m = res.population.size();
  std::size_t e = res.population.equivalent_count();
  std::size_t n = sample_count(fraction, m);

  for (uint64_t seed : seeds) {
    // One candidate pool and one baseline per seed, shared by both
    // strategies, so the draw is the only thing that differs between them.
    auto candidates = candidate_pool(
        d, n * cfg.candidate_budget_factor,
        testgen::derive_seed(cfg.seed, "candidates:seed" + std::to_string(seed)),
        cfg.sequence_length);
    faultsim::ExtendableRandomCurve rfc(
        netlist, fl, testgen::derive_seed(cfg.seed, "baseline:seed" + std::to_string(seed)),
        std::max(cfg.baseline_cap, candidates.size()), cfg.workers);

    for (const char* strategy : {"random", "test-oriented"}) {
      StrategyRun run;
      run.strategy = strategy;
      run.seed = seed;
      run.plan = run.strategy == "random"
                     ? random_sample(res.population, fraction, seed)
                     : weighted_sample(res.population, weights, fraction, seed);

      mutation::MutantSet sample;
      sample.design_name = res.population.design_name;
      sample.design_hash = res.population.design_hash;
      sample.id =
          res.population.id + "-" + run.strategy + "-s" + std::to_string(seed);
      for (std::size_t i : run.plan.selected)
        sample.mutants.push_back(res.population.mutants[i]);

      auto greedy = testgen::generate_validation_set(d, sample, candidates,
                                                     {cfg.max_ts_length, cfg.workers});
      run.ts = std::move(greedy.ts);

      auto full = mutation::build_kill_matrix(d, res.population, run.ts, cfg.workers);
      run.score = metrics::mutation_score(full.killed_count(), m, e);
      run.row.circuit = d.name;
      run.row.strategy = run.strategy;
      run.row.seed = seed;
      run.row.sample_size = run.plan.sample_size;
      run.row.ms = run.score.value();
      if (run.ts.empty()) {
        run.row.nlfce = 0.0;
      } else {
        auto det = faultsim::fault_simulate(netlist, run.ts, fl, cfg.workers);
        auto curve = faultsim::coverage_curve(det, fl);
        rfc.ensure_length(run.ts.size());
        auto dl = metrics::delta_l(det.detected_count(), run.ts.size(), rfc);
        try {
          double raw = metrics::delta_fc(curve, rfc.realized(), run.ts.size());
          auto erow = metrics::efficiency_row(d.name, run.strategy, raw, dl);
          run.row.nlfce = erow.nlfce;
          run.row.lower_bound = erow.lower_bound;
        } catch (const Error& err) {
          if (err.code() != Errc::ZeroBaseline) throw;
          run.row.lower_bound = dl.lower_bound;
        }
      }
      res.runs.push_back(std::move(run));
    }
  }

  for (const char* strategy : {"random", "test-oriented"}) {
    metrics::CompareRow mean;
    mean.circuit = d.name;
    mean.strategy = strategy;
    double ms_sum = 0;
    double nlfce_sum = 0;
    bool nlfce_defined = true;
    std::size_t count = 0;
    for (const auto& run : res.runs) {
      if (run.strategy != strategy) continue;
      res.rows.push_back(run.row);
      ms_sum += run.row.ms;
      if (run.row.nlfce)
        nlfce_sum += *run.row.nlfce;
      else
        nlfce_defined = false;
      mean.sample_size = run.row.sample_size;
      ++count;
    }
    mean.ms = ms_sum / static_cast<double>(count);
    if (nlfce_defined) mean.nlfce = nlfce_sum / static_cast<double>(count);
    res.rows.push_back(std::move(mean));
  }
  return res;
}

}  // namespace musa::sampling
