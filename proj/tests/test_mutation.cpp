#include <cstdio>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "mhdl_fixtures.hpp"
#include "musa/mhdl.hpp"
#include "musa/mutation.hpp"

using namespace musa;
using mutation::Mutant;
using mutation::MutantSet;
using mutation::OperatorTag;

namespace {

BitVec bits(const std::string& s) {
  BitVec v;
  for (char c : s) v.push_back(c == '1' ? 1 : 0);
  return v;
}

testgen::VectorSequence seq_of(uint32_t width, std::initializer_list<const char*> rows) {
  testgen::VectorSequence seq;
  seq.width = width;
  for (const char* r : rows) seq.vectors.push_back(bits(r));
  return seq;
}

const Mutant* find_payload(const MutantSet& set, const std::string& payload) {
  for (const Mutant& m : set.mutants) {
    if (m.payload == payload) return &m;
  }
  return nullptr;
}

std::vector<std::string> payloads(const MutantSet& set) {
  std::vector<std::string> out;
  for (const Mutant& m : set.mutants) out.push_back(m.payload);
  return out;
}

std::string mutants_tsv(const MutantSet& set) {
  std::ostringstream out;
  mutation::write_mutants_tsv(out, set);
  return out.str();
}

/// Node-by-node field snapshot used to count how many nodes an edit touched.
using NodeKey = std::tuple<int, int, std::string, uint64_t, uint32_t>;
std::vector<NodeKey> node_keys(const mhdl::Design& d) {
  std::vector<NodeKey> keys;
  mhdl::for_each_node(d, [&](const mhdl::Expr& e) {
    keys.emplace_back(static_cast<int>(e.kind), static_cast<int>(e.op), e.name, e.value,
                      e.width);
  });
  return keys;
}

const char* kTwoInput = "design t; in a:1; in b:1; out y:1; y <= a and b;";
const char* kConstCompare =
    "design t; in cnt:4; out y:1; const C:4 = 5; y <= cnt = C;";

}  // namespace

TEST_CASE("a logical operator offers the five alternatives") {
  mhdl::Design d = mhdl::parse_mhdl(kTwoInput);
  CHECK(mutation::enumerate_sites(d, OperatorTag::LOR) == std::vector<uint32_t>{0});

  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  REQUIRE(set.size() == 5);
  CHECK(payloads(set) == std::vector<std::string>{"and->or", "and->nand", "and->nor",
                                                  "and->xor", "and->xnor"});
  for (const Mutant& m : set.mutants) {
    CHECK(m.op == OperatorTag::LOR);
    CHECK(m.site == 0);
    CHECK(m.status == Mutant::Status::Live);
  }
  CHECK(set.mutants[0].id == "m0001");
  CHECK(set.mutants[4].id == "m0005");
  CHECK(set.design_name == "t");
  CHECK(set.id == "t-" + to_hex(set.design_hash));
}

TEST_CASE("constant replacement needs a constant declaration") {
  mhdl::Design no_decl = mhdl::parse_mhdl(kTwoInput);
  CHECK(mutation::enumerate_sites(no_decl, OperatorTag::CR).empty());
  CHECK(mutation::generate_mutants(no_decl, {OperatorTag::CR}).size() == 0);

  // A bare literal without any constant declaration is not a CR site either.
  mhdl::Design lit = mhdl::parse_mhdl("design l; in a:2; out y:2; y <= a + 1;");
  CHECK(mutation::enumerate_sites(lit, OperatorTag::CR).empty());
}

TEST_CASE("constant replacement draws boundary values and declared constants") {
  mhdl::Design d = mhdl::parse_mhdl(kConstCompare);
  CHECK(mutation::enumerate_sites(d, OperatorTag::CR) == std::vector<uint32_t>{2});

  MutantSet cr = mutation::generate_mutants(d, {OperatorTag::CR});
  REQUIRE(cr.size() == 4);
  CHECK(payloads(cr) == std::vector<std::string>{"5->0", "5->15", "5->6", "5->4"});

  mhdl::Design zeroed = mutation::apply_mutant(d, cr.mutants[0]);
  CHECK(mhdl::print_mhdl(zeroed).find("cnt = 0") != std::string::npos);

  // A second same-width constant joins the replacement set.
  mhdl::Design two = mhdl::parse_mhdl(
      "design t; in cnt:4; out y:1; const C:4 = 5; const D:4 = 9; y <= cnt = C;");
  MutantSet cr2 = mutation::generate_mutants(two, {OperatorTag::CR});
  CHECK(payloads(cr2) ==
        std::vector<std::string>{"5->0", "5->15", "5->6", "5->4", "5->9"});
}

TEST_CASE("variable replacement uses same-width names and drops loops") {
  mhdl::Design d =
      mhdl::parse_mhdl("design v; in a:1; in b:1; in c:1; out y:1; y <= a and b;");
  CHECK(mutation::enumerate_sites(d, OperatorTag::VR) == std::vector<uint32_t>{1, 2});

  MutantSet vr = mutation::generate_mutants(d, {OperatorTag::VR});
  REQUIRE(vr.size() == 4);
  CHECK(payloads(vr) == std::vector<std::string>{"a->b", "a->c", "b->a", "b->c"});
  // a->y and b->y would read the output being assigned; both are dropped.
  CHECK(find_payload(vr, "a->y") == nullptr);
  CHECK(find_payload(vr, "b->y") == nullptr);
}

TEST_CASE("a constant reference can swap to another variable's constant") {
  mhdl::Design d = mhdl::parse_mhdl(kConstCompare);
  MutantSet all = mutation::generate_mutants(
      d, {OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR});
  CHECK(all.count(OperatorTag::LOR) == 0);  // `=` is a comparison, not a logical op
  CHECK(all.count(OperatorTag::VR) == 0);   // no other 4-bit variable exists
  CHECK(all.count(OperatorTag::CVR) == 1);
  CHECK(all.count(OperatorTag::CR) == 4);
  const Mutant* cvr = find_payload(all, "cnt->C");
  REQUIRE(cvr != nullptr);
  CHECK(mhdl::print_mhdl(mutation::apply_mutant(d, *cvr)).find("C = C") !=
        std::string::npos);
}

TEST_CASE("applying a mutant elsewhere is refused") {
  mhdl::Design d = mhdl::parse_mhdl(kTwoInput);
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});

  auto stale_code = [&](const mhdl::Design& target, const Mutant& m) {
    try {
      mutation::apply_mutant(target, m);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Internal;
  };

  mhdl::Design other = mhdl::parse_mhdl(kConstCompare);
  CHECK(stale_code(other, set.mutants[0]) == Errc::StaleMutant);

  // The hash is over canonical text, so a reparse of the same source works.
  mhdl::Design reparsed = mhdl::parse_mhdl(kTwoInput);
  CHECK_NOTHROW(mutation::apply_mutant(reparsed, set.mutants[0]));

  Mutant bad;
  bad.design_hash = mhdl::content_hash(d);
  bad.site = 1;  // a name reference, not a logical operator
  bad.replacement.kind = mutation::Replacement::Kind::Operator;
  bad.replacement.op = mhdl::BinOp::Or;
  CHECK(stale_code(d, bad) == Errc::StaleMutant);

  Mutant missing = set.mutants[0];
  missing.site = 999;
  CHECK(stale_code(d, missing) == Errc::StaleMutant);
}

TEST_CASE("a kill needs an input that separates the truth tables") {
  mhdl::Design d = mhdl::parse_mhdl(kTwoInput);
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  const Mutant& to_or = *find_payload(set, "and->or");
  const Mutant& to_nand = *find_payload(set, "and->nand");

  auto killed = mutation::kill_check(d, to_or, seq_of(2, {"10"}));
  CHECK(killed.killed);
  CHECK(killed.witness == 1);
  CHECK_FALSE(mutation::kill_check(d, to_or, seq_of(2, {"11"})).killed);

  // The complemented output differs on every vector.
  for (const char* row : {"00", "01", "10", "11"}) {
    auto out = mutation::kill_check(d, to_nand, seq_of(2, {row}));
    CHECK(out.killed);
    CHECK(out.witness == 1);
  }

  CHECK_THROWS_AS(mutation::kill_check(d, to_or, seq_of(3, {"101"})), Error);
}

TEST_CASE("kill checks restart state at segment boundaries") {
  mhdl::Design d = mhdl::parse_mhdl("design acc; in en:1; out q:1; reg q <= q xor en;");
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  const Mutant& to_or = *find_payload(set, "xor->or");

  // Continuously the toggle diverges once en pulses twice; the or-register
  // saturates at 1 while the original falls back to 0.
  auto flat = mutation::kill_check(d, to_or, seq_of(1, {"1", "1", "1", "0"}));
  CHECK(flat.killed);
  CHECK(flat.witness == 3);

  // The same vectors in two reset-separated halves never accumulate enough
  // history to tell the designs apart.
  auto split = seq_of(1, {"1", "1", "1", "0"});
  split.segment_length = 2;
  CHECK_FALSE(mutation::kill_check(d, to_or, split).killed);

  // Witness indices count flat across segments.
  auto late = seq_of(1, {"0", "0", "0", "1", "1", "0"});
  late.segment_length = 3;
  auto out = mutation::kill_check(d, to_or, late);
  CHECK(out.killed);
  CHECK(out.witness == 6);
}

TEST_CASE("identical truth tables are proven equivalent") {
  mhdl::Design d = mhdl::parse_mhdl("design e; in a:1; out y:1; y <= a and a;");
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  mutation::EquivalenceConfig cfg;

  auto equal = mutation::classify_equivalence(d, *find_payload(set, "and->or"), cfg);
  CHECK(equal.verdict == mutation::Classification::Verdict::Equivalent);
  CHECK(equal.exhaustive);
  CHECK_FALSE(equal.witness.has_value());

  auto flipped = mutation::classify_equivalence(d, *find_payload(set, "and->nand"), cfg);
  CHECK(flipped.verdict == mutation::Classification::Verdict::Killedable);
  REQUIRE(flipped.witness.has_value());
  CHECK(flipped.witness->vectors == std::vector<BitVec>{bits("0")});
  CHECK(mutation::kill_check(d, *find_payload(set, "and->nand"), *flipped.witness).killed);
}

TEST_CASE("the exhaustive witness is the first separating stimulus") {
  mhdl::Design d = mhdl::parse_mhdl(kTwoInput);
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  auto result = mutation::classify_equivalence(d, *find_payload(set, "and->or"),
                                               mutation::EquivalenceConfig{});
  CHECK(result.verdict == mutation::Classification::Verdict::Killedable);
  CHECK(result.exhaustive);
  REQUIRE(result.witness.has_value());
  CHECK(result.witness->vectors == std::vector<BitVec>{bits("10")});
  CHECK(mutation::kill_check(d, *find_payload(set, "and->or"), *result.witness).killed);
}

TEST_CASE("sequential equivalence walks every bounded stimulus") {
  mhdl::Design d = mhdl::parse_mhdl("design s; in en:1; out q:1; reg q <= q xor en;");
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  auto result = mutation::classify_equivalence(d, *find_payload(set, "xor->or"),
                                               mutation::EquivalenceConfig{});
  CHECK(result.verdict == mutation::Classification::Verdict::Killedable);
  CHECK(result.exhaustive);
  REQUIRE(result.witness.has_value());
  // Divergence needs two enable pulses plus an observing step; within the
  // eight-step horizon the earliest stimulus defers them to the tail.
  CHECK(result.witness->size() == 8);
  CHECK(mutation::kill_check(d, *find_payload(set, "xor->or"), *result.witness).killed);
}

TEST_CASE("an oversized stimulus space ends unresolved") {
  mhdl::Design d = mhdl::parse_mhdl("design u; in a:17; out y:17; y <= a or a;");
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  auto result = mutation::classify_equivalence(d, *find_payload(set, "or->and"),
                                               mutation::EquivalenceConfig{});
  CHECK(result.verdict == mutation::Classification::Verdict::Unknown);
  CHECK_FALSE(result.exhaustive);
  CHECK_FALSE(result.witness.has_value());
}

TEST_CASE("classification marks equivalents and leaves killables live") {
  mhdl::Design d = mhdl::parse_mhdl("design e; in a:1; out y:1; y <= a and a;");
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  mutation::classify_all(d, set, mutation::EquivalenceConfig{});

  CHECK(set.equivalent_count() == 1);
  CHECK(find_payload(set, "and->or")->status == Mutant::Status::Equivalent);
  for (const char* p : {"and->nand", "and->nor", "and->xor", "and->xnor"}) {
    CHECK(find_payload(set, p)->status == Mutant::Status::Live);
  }

  // The matrix never simulates proven equivalents, and recording kills
  // leaves them untouched.
  auto ts = seq_of(1, {"0", "1"});
  auto matrix = mutation::build_kill_matrix(d, set, ts);
  CHECK(matrix.killed_count() == 4);
  std::size_t equiv_row = find_payload(set, "and->or") - set.mutants.data();
  CHECK_FALSE(matrix.first_kill[equiv_row].has_value());
  CHECK_FALSE(matrix.cell(equiv_row, 0));
  CHECK_FALSE(matrix.cell(equiv_row, 1));

  mutation::record_kills(set, matrix);
  CHECK(find_payload(set, "and->or")->status == Mutant::Status::Equivalent);
  CHECK(find_payload(set, "and->nand")->witness_index == 1);
  CHECK(find_payload(set, "and->nor")->witness_index == 1);
  CHECK(find_payload(set, "and->xor")->witness_index == 2);
  CHECK(find_payload(set, "and->xnor")->witness_index == 1);
}

TEST_CASE("the kill matrix records every separating vector") {
  mhdl::Design d = mhdl::parse_mhdl(kTwoInput);
  MutantSet set = mutation::generate_mutants(d, {OperatorTag::LOR});
  auto ts = seq_of(2, {"00", "01", "10", "11"});
  auto matrix = mutation::build_kill_matrix(d, set, ts);

  REQUIRE(matrix.num_mutants == 5);
  REQUIRE(matrix.num_vectors == 4);
  auto row = [&](std::size_t m) {
    std::string cells;
    for (std::size_t t = 0; t < 4; ++t) cells += matrix.cell(m, t) ? '1' : '0';
    return cells;
  };
  CHECK(row(0) == "0110");  // or: differs on the mixed inputs
  CHECK(row(1) == "1111");  // nand: complement everywhere
  CHECK(row(2) == "1001");  // nor
  CHECK(row(3) == "0111");  // xor
  CHECK(row(4) == "1000");  // xnor
  CHECK(matrix.first_kill[0] == 1);
  CHECK(matrix.first_kill[1] == 0);
  CHECK(matrix.first_kill[2] == 0);
  CHECK(matrix.first_kill[3] == 1);
  CHECK(matrix.first_kill[4] == 0);
  CHECK(matrix.killed_count() == 5);

  mutation::record_kills(set, matrix);
  for (const Mutant& m : set.mutants) CHECK(m.status == Mutant::Status::Killed);
  CHECK(set.mutants[0].witness_index == 2);
  CHECK(set.mutants[1].witness_index == 1);
}

TEST_CASE("the mutant list exports as a fixed-column table") {
  mhdl::Design d = mhdl::parse_mhdl(kConstCompare);
  MutantSet set = mutation::generate_mutants(
      d, {OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR});
  CHECK(mutants_tsv(set) ==
        "mutant_id\toperator\tsite\tpayload\tstatus\twitness_index\n"
        "m0001\tCVR\t1\tcnt->C\tLive\t\n"
        "m0002\tCR\t2\t5->0\tLive\t\n"
        "m0003\tCR\t2\t5->15\tLive\t\n"
        "m0004\tCR\t2\t5->6\tLive\t\n"
        "m0005\tCR\t2\t5->4\tLive\t\n");
}

TEST_CASE("every generated mutant is a valid single-node edit") {
  for (std::size_t i = 0; i < fixtures::kMhdlFixtureCount; ++i) {
    std::string name = fixtures::kMhdlFixtures[i].name;
    CAPTURE(name);
    mhdl::Design d = mhdl::parse_mhdl(fixtures::kMhdlFixtures[i].src);
    MutantSet set = mutation::generate_mutants(
        d, {OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR});

    std::vector<NodeKey> original = node_keys(d);
    std::vector<std::string> prints;
    for (std::size_t k = 0; k < set.size(); ++k) {
      char want_id[16];
      std::snprintf(want_id, sizeof(want_id), "m%04zu", k + 1);
      CHECK(set.mutants[k].id == want_id);
      mhdl::Design mutated = mutation::apply_mutant(d, set.mutants[k]);
      prints.push_back(mhdl::print_mhdl(mutated));

      std::vector<NodeKey> edited = node_keys(mutated);
      REQUIRE(edited.size() == original.size());
      std::size_t touched = 0;
      for (std::size_t n = 0; n < edited.size(); ++n) {
        if (edited[n] != original[n]) ++touched;
      }
      CHECK(touched == 1);
    }

    // Deduplication holds: all mutants distinct, none identical to the
    // original design.
    std::string base = mhdl::print_mhdl(d);
    for (std::size_t a = 0; a < prints.size(); ++a) {
      CHECK(prints[a] != base);
      for (std::size_t b = a + 1; b < prints.size(); ++b) CHECK(prints[a] != prints[b]);
    }
  }
}

TEST_CASE("generation order is reproducible") {
  for (const char* src : {kTwoInput, kConstCompare}) {
    mhdl::Design d1 = mhdl::parse_mhdl(src);
    mhdl::Design d2 = mhdl::parse_mhdl(src);
    MutantSet s1 = mutation::generate_mutants(
        d1, {OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR});
    MutantSet s2 = mutation::generate_mutants(
        d2, {OperatorTag::LOR, OperatorTag::VR, OperatorTag::CVR, OperatorTag::CR});
    CHECK(s1.id == s2.id);
    CHECK(mutants_tsv(s1) == mutants_tsv(s2));
  }
}

TEST_CASE("sites are numbered by pre-order position") {
  mhdl::Design d = mhdl::parse_mhdl(
      "design m2; in a:1; in b:1; out y:1; y <= (a and b) or (a and b);");
  CHECK(mutation::enumerate_sites(d, OperatorTag::LOR) ==
        std::vector<uint32_t>{0, 1, 4});
  CHECK(mutation::enumerate_sites(d, OperatorTag::VR) ==
        std::vector<uint32_t>{2, 3, 5, 6});
  CHECK(mutation::enumerate_sites(d, OperatorTag::CVR).empty());
  CHECK(mutation::enumerate_sites(d, OperatorTag::CR).empty());
}
