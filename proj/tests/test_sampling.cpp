#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "musa/mhdl.hpp"
#include "musa/sampling.hpp"

using namespace musa;
using mutation::Mutant;
using mutation::MutantSet;
using mutation::OperatorTag;
using sampling::OperatorWeights;
using sampling::SamplePlan;

namespace {

Errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

/// A mutant set with the given per-operator composition. Sampling only
/// looks at the operator tags, so the mutants carry no real edits.
MutantSet fake_set(std::initializer_list<std::pair<OperatorTag, int>> counts) {
  MutantSet set;
  set.design_name = "fake";
  set.id = "fake-0";
  int k = 0;
  for (const auto& [op, count] : counts) {
    for (int i = 0; i < count; ++i) {
      Mutant m;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "m%04d", ++k);
      m.id = buf;
      m.op = op;
      set.mutants.push_back(std::move(m));
    }
  }
  return set;
}

std::size_t selected_of(const MutantSet& set, const SamplePlan& plan, OperatorTag op) {
  std::size_t n = 0;
  for (std::size_t i : plan.selected) n += set.mutants[i].op == op ? 1 : 0;
  return n;
}

const char* kStudyDesign =
    "design sd; in a:2; in b:2; out y:1; const T:2 = 2; y <= (a and b) = T;";

}  // namespace

TEST_CASE("a uniform sample draws the rounded fraction, at least one") {
  auto set = fake_set({{OperatorTag::LOR, 100}});
  auto plan = sampling::random_sample(set, 0.10, 7);
  CHECK(plan.sample_size == 10);
  CHECK(plan.selected.size() == 10);
  CHECK(plan.quotas.empty());
  CHECK(std::is_sorted(plan.selected.begin(), plan.selected.end()));
  CHECK(std::adjacent_find(plan.selected.begin(), plan.selected.end()) ==
        plan.selected.end());
  for (std::size_t i : plan.selected) CHECK(i < 100);

  CHECK(sampling::random_sample(fake_set({{OperatorTag::VR, 5}}), 0.10, 7).sample_size == 1);
  CHECK(sampling::random_sample(fake_set({{OperatorTag::VR, 3}}), 0.50, 7).sample_size == 2);
  CHECK(sampling::random_sample(fake_set({{OperatorTag::VR, 1}}), 0.01, 7).sample_size == 1);
  CHECK(sampling::random_sample(set, 1.0, 7).selected.size() == 100);

  auto again = sampling::random_sample(set, 0.10, 7);
  CHECK(again.selected == plan.selected);
  CHECK(sampling::random_sample(set, 0.10, 8).selected != plan.selected);
}

TEST_CASE("sampling rejects bad draws") {
  MutantSet empty;
  CHECK(thrown_code([&] { sampling::random_sample(empty, 0.1, 1); }) ==
        Errc::EmptyMutantSet);
  auto set = fake_set({{OperatorTag::LOR, 4}});
  CHECK(thrown_code([&] { sampling::random_sample(set, 0.0, 1); }) == Errc::RangeError);
  CHECK(thrown_code([&] { sampling::random_sample(set, 1.5, 1); }) == Errc::RangeError);
  CHECK(thrown_code([&] { sampling::random_sample(set, 0.5, 0); }) == Errc::ZeroSeed);
  OperatorWeights w;
  CHECK(thrown_code([&] { sampling::weighted_sample(empty, w, 0.1, 1); }) ==
        Errc::EmptyMutantSet);
  CHECK(thrown_code([&] { sampling::weighted_sample(set, w, 2.0, 1); }) ==
        Errc::RangeError);
  CHECK(thrown_code([&] { sampling::weighted_sample(set, w, 0.5, 0); }) == Errc::ZeroSeed);
}

TEST_CASE("weights apportion the sample by largest remainder") {
  auto set = fake_set({{OperatorTag::CR, 40},
                       {OperatorTag::CVR, 30},
                       {OperatorTag::VR, 20},
                       {OperatorTag::LOR, 10}});
  OperatorWeights w;
  w.set(OperatorTag::CR, 87.3);
  w.set(OperatorTag::CVR, 32.3);
  w.set(OperatorTag::VR, 23.7);
  w.set(OperatorTag::LOR, 7.16);

  auto plan = sampling::weighted_sample(set, w, 0.10, 9);
  CHECK(plan.sample_size == 10);
  using Quotas = std::vector<std::pair<OperatorTag, std::size_t>>;
  CHECK(plan.quotas == Quotas{{OperatorTag::CR, 6},
                              {OperatorTag::CVR, 2},
                              {OperatorTag::VR, 2},
                              {OperatorTag::LOR, 0}});
  CHECK(plan.selected.size() == 10);
  CHECK(selected_of(set, plan, OperatorTag::CR) == 6);
  CHECK(selected_of(set, plan, OperatorTag::CVR) == 2);
  CHECK(selected_of(set, plan, OperatorTag::VR) == 2);
  CHECK(selected_of(set, plan, OperatorTag::LOR) == 0);
}

TEST_CASE("a quota never exceeds its group; the excess moves on") {
  auto set = fake_set({{OperatorTag::CR, 2},
                       {OperatorTag::CVR, 10},
                       {OperatorTag::VR, 10},
                       {OperatorTag::LOR, 10}});
  OperatorWeights w;
  w.set(OperatorTag::CR, 1000.0);
  w.set(OperatorTag::CVR, 1.0);
  w.set(OperatorTag::VR, 1.0);
  w.set(OperatorTag::LOR, 1.0);

  auto plan = sampling::weighted_sample(set, w, 0.3125, 3);
  CHECK(plan.sample_size == 10);
  using Quotas = std::vector<std::pair<OperatorTag, std::size_t>>;
  CHECK(plan.quotas == Quotas{{OperatorTag::CR, 2},
                              {OperatorTag::CVR, 3},
                              {OperatorTag::VR, 3},
                              {OperatorTag::LOR, 2}});
}

TEST_CASE("remainder ties fall to the precedence order") {
  auto set = fake_set({{OperatorTag::CR, 5}, {OperatorTag::CVR, 5}});
  OperatorWeights w;
  w.set(OperatorTag::CR, 10.0);
  w.set(OperatorTag::CVR, 10.0);
  auto plan = sampling::weighted_sample(set, w, 0.3, 2);
  using Quotas = std::vector<std::pair<OperatorTag, std::size_t>>;
  CHECK(plan.quotas == Quotas{{OperatorTag::CR, 2}, {OperatorTag::CVR, 1}});
}

TEST_CASE("weights below the floor are clamped, missing ones default") {
  OperatorWeights w;
  w.set(OperatorTag::CR, -42.0);
  CHECK(w.get(OperatorTag::CR) == sampling::kMinWeight);
  CHECK_FALSE(w.has(OperatorTag::LOR));
  CHECK(w.get(OperatorTag::LOR) == sampling::kMinWeight);

  // A dominant weight against floored ones takes the whole (tiny) sample.
  auto set = fake_set({{OperatorTag::CR, 1}, {OperatorTag::LOR, 9}});
  OperatorWeights dominant;
  dominant.set(OperatorTag::CR, 100.0);
  auto plan = sampling::weighted_sample(set, dominant, 0.1, 5);
  REQUIRE(plan.selected.size() == 1);
  CHECK(set.mutants[plan.selected[0]].op == OperatorTag::CR);
}

TEST_CASE("scaling all weights leaves the quotas alone") {
  auto set = fake_set({{OperatorTag::CR, 17},
                       {OperatorTag::CVR, 11},
                       {OperatorTag::VR, 23},
                       {OperatorTag::LOR, 9}});
  OperatorWeights base;
  base.set(OperatorTag::CR, 87.3);
  base.set(OperatorTag::CVR, 32.3);
  base.set(OperatorTag::VR, 23.7);
  base.set(OperatorTag::LOR, 7.16);
  auto reference = sampling::weighted_sample(set, base, 0.25, 6);

  for (double scale : {2.0, 0.5, 8.0, 3.7, 10.0}) {
    OperatorWeights scaled;
    scaled.set(OperatorTag::CR, 87.3 * scale);
    scaled.set(OperatorTag::CVR, 32.3 * scale);
    scaled.set(OperatorTag::VR, 23.7 * scale);
    scaled.set(OperatorTag::LOR, 7.16 * scale);
    auto plan = sampling::weighted_sample(set, scaled, 0.25, 6);
    CAPTURE(scale);
    CHECK(plan.quotas == reference.quotas);
    CHECK(plan.selected == reference.selected);
  }
}

TEST_CASE("both strategies always draw the same number of mutants") {
  testgen::Prng rng(0xABCD);
  const double fractions[] = {0.05, 0.10, 0.25, 0.50, 1.0};
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    std::initializer_list<OperatorTag> ops = {OperatorTag::LOR, OperatorTag::VR,
                                              OperatorTag::CVR, OperatorTag::CR};
    MutantSet set;
    set.design_name = "fake";
    set.id = "fake-0";
    int k = 0;
    for (OperatorTag op : ops) {
      auto count = rng.next_below(21);
      for (uint64_t i = 0; i < count; ++i) {
        Mutant m;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "m%04d", ++k);
        m.id = buf;
        m.op = op;
        set.mutants.push_back(std::move(m));
      }
    }
    if (set.mutants.empty()) {
      Mutant m;
      m.id = "m0001";
      m.op = OperatorTag::LOR;
      set.mutants.push_back(std::move(m));
    }

    OperatorWeights w;
    for (OperatorTag op : ops) {
      if (rng.next() & 1) {
        w.set(op, static_cast<double>(rng.next_below(40000)) / 100.0 - 50.0);
      }
    }
    double fraction = fractions[rng.next_below(5)];
    uint64_t seed = rng.next() | 1;

    auto uniform = sampling::random_sample(set, fraction, seed);
    auto weighted = sampling::weighted_sample(set, w, fraction, seed);
    CHECK(uniform.sample_size == weighted.sample_size);
    CHECK(uniform.selected.size() == weighted.selected.size());
    CHECK(std::is_sorted(weighted.selected.begin(), weighted.selected.end()));
    CHECK(std::adjacent_find(weighted.selected.begin(), weighted.selected.end()) ==
          weighted.selected.end());

    std::size_t quota_sum = 0;
    for (const auto& [op, quota] : weighted.quotas) {
      quota_sum += quota;
      CHECK(selected_of(set, weighted, op) == quota);
      CHECK(quota <= set.count(op));
    }
    CHECK(quota_sum == weighted.sample_size);
  }
}

TEST_CASE("the efficiency study measures every applicable operator") {
  mhdl::Design d = mhdl::parse_mhdl(kStudyDesign);
  sampling::PipelineConfig cfg;
  cfg.seed = 21;
  auto study = sampling::operator_efficiency_study(d, cfg);

  CHECK(study.circuit == "sd");
  REQUIRE(study.operators.size() == 4);
  const std::size_t expect_counts[] = {5, 2, 2, 3};  // LOR, VR, CVR, CR
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& st = study.operators[i];
    CHECK(st.op == mutation::kAllOperators[i]);
    CHECK(st.set.size() == expect_counts[i]);
    CHECK(st.row.circuit == "sd");
    CHECK(st.row.label == mutation::operator_name(st.op));
    CHECK(st.weight >= sampling::kMinWeight);
    CHECK(study.weights.has(st.op));
    CHECK(study.weights.get(st.op) == st.weight);
    // Every mutant of this design is killable and the candidate budget
    // covers the whole 4-bit input space, so nothing survives.
    CHECK(st.set.killed_count() == st.set.size());
    CHECK_FALSE(st.ts.empty());
    CHECK(st.row.nlfce.has_value());
  }
  CHECK(study.weights.provenance == "study:sd");
}

TEST_CASE("the study is reproducible and worker-independent") {
  mhdl::Design d = mhdl::parse_mhdl(kStudyDesign);
  sampling::PipelineConfig serial;
  serial.seed = 33;
  sampling::PipelineConfig wide = serial;
  wide.workers = 3;

  auto render = [](const sampling::StudyResult& r) {
    std::vector<metrics::EfficiencyRow> rows;
    for (const auto& st : r.operators) rows.push_back(st.row);
    std::ostringstream out;
    metrics::write_efficiency_tsv(out, rows);
    return out.str();
  };

  auto a = sampling::operator_efficiency_study(d, serial);
  auto b = sampling::operator_efficiency_study(d, wide);
  auto c = sampling::operator_efficiency_study(d, serial);
  CHECK(render(a) == render(b));
  CHECK(render(a) == render(c));
  for (std::size_t i = 0; i < a.operators.size(); ++i) {
    CHECK(a.operators[i].ts.vectors == b.operators[i].ts.vectors);
    CHECK(a.operators[i].weight == b.operators[i].weight);
  }
}

TEST_CASE("a design with no usable operators fails the study") {
  mhdl::Design d = mhdl::parse_mhdl("design z; in a:1; out y:1; y <= not a;");
  CHECK(thrown_code([&] {
          sampling::operator_efficiency_study(d, sampling::PipelineConfig{});
        }) == Errc::NoApplicableOperators);
}

TEST_CASE("strategy comparison scores samples against the full population") {
  mhdl::Design d = mhdl::parse_mhdl(kStudyDesign);
  sampling::PipelineConfig cfg;
  cfg.seed = 17;
  auto study = sampling::operator_efficiency_study(d, cfg);
  auto result = sampling::compare_strategies(d, study.weights, 0.25, {3, 4}, cfg);

  CHECK(result.circuit == "sd");
  CHECK(result.population.size() == 12);
  REQUIRE(result.runs.size() == 4);
  CHECK(result.runs[0].strategy == "random");
  CHECK(result.runs[0].seed == 3);
  CHECK(result.runs[1].strategy == "test-oriented");
  CHECK(result.runs[1].seed == 3);
  CHECK(result.runs[2].seed == 4);

  for (const auto& run : result.runs) {
    CHECK(run.plan.sample_size == 3);
    CHECK(run.plan.selected.size() == 3);
    CHECK(run.score.generated == 12);
    CHECK(run.score.value() >= 0.0);
    CHECK(run.score.value() <= 1.0);
    CHECK(run.ts.provenance_string() ==
          "mutation-adequate set=" + result.population.id + "-" + run.strategy +
              "-s" + std::to_string(run.seed));
  }

  REQUIRE(result.rows.size() == 6);
  CHECK(result.rows[0].strategy == "random");
  CHECK(result.rows[0].seed == 3);
  CHECK(result.rows[1].seed == 4);
  CHECK_FALSE(result.rows[2].seed.has_value());  // the random mean row
  CHECK(result.rows[3].strategy == "test-oriented");
  CHECK_FALSE(result.rows[5].seed.has_value());
  CHECK(result.rows[2].ms ==
        (result.rows[0].ms + result.rows[1].ms) / 2.0);
}

TEST_CASE("strategy comparison is reproducible across worker counts") {
  mhdl::Design d = mhdl::parse_mhdl(kStudyDesign);
  sampling::PipelineConfig serial;
  serial.seed = 29;
  sampling::PipelineConfig wide = serial;
  wide.workers = 3;
  auto study = sampling::operator_efficiency_study(d, serial);

  auto render = [](const sampling::CompareResult& r) {
    std::ostringstream out;
    metrics::write_compare_tsv(out, r.rows);
    return out.str();
  };
  auto a = sampling::compare_strategies(d, study.weights, 0.25, {5, 6}, serial);
  auto b = sampling::compare_strategies(d, study.weights, 0.25, {5, 6}, wide);
  CHECK(render(a) == render(b));
}

TEST_CASE("comparison preconditions are enforced") {
  mhdl::Design d = mhdl::parse_mhdl(kStudyDesign);
  OperatorWeights w;
  CHECK(thrown_code([&] {
          sampling::compare_strategies(d, w, 0.25, {}, sampling::PipelineConfig{});
        }) == Errc::ConfigError);
  CHECK(thrown_code([&] {
          sampling::compare_strategies(d, w, 1.5, {1}, sampling::PipelineConfig{});
        }) == Errc::RangeError);

  mhdl::Design z = mhdl::parse_mhdl("design z; in a:1; out y:1; y <= not a;");
  CHECK(thrown_code([&] {
          sampling::compare_strategies(z, w, 0.25, {1}, sampling::PipelineConfig{});
        }) == Errc::EmptyMutantSet);
}
