#include <sstream>

#include "doctest.h"
#include "musa/vectors.hpp"

using namespace musa;
using namespace musa::testgen;

namespace {

std::string bits(const BitVec& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] ? '1' : '0';
  return s;
}

}  // namespace

TEST_CASE("prng stream matches the fixed xorshift64* recurrence") {
  // First outputs for seed 1, computed independently from the recurrence
  // s ^= s>>12; s ^= s<<25; s ^= s>>27; out = s * 0x2545F4914F6CDD1D.
  Prng p(1);
  CHECK(p.next() == 0x47e4ce4b896cdd1dULL);
  CHECK(p.next() == 0xabcfa6a8e079651dULL);
  CHECK(p.next() == 0xb9d10d8feb731f57ULL);
}

TEST_CASE("zero seed is rejected") {
  CHECK_THROWS_AS(Prng(0), Error);
  try {
    Prng p(0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroSeed);
  }
}

TEST_CASE("next_below is unbiased over its range and deterministic") {
  Prng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = a.next_below(10);
    CHECK(v < 10);
    CHECK(v == b.next_below(10));
  }
  Prng c(7);
  CHECK(c.next_below(1) == 0);
}

TEST_CASE("random vectors take one word per 64 bits, MSB first") {
  VectorSequence seq = random_vectors(8, 3, 1);
  REQUIRE(seq.size() == 3);
  CHECK(seq.width == 8);
  // Top bytes of the three words frozen above.
  CHECK(bits(seq.vectors[0]) == "01000111");
  CHECK(bits(seq.vectors[1]) == "10101011");
  CHECK(bits(seq.vectors[2]) == "10111001");
}

TEST_CASE("vectors wider than a word consume fresh words in order") {
  VectorSequence seq = random_vectors(70, 2, 7);
  REQUIRE(seq.size() == 2);
  CHECK(bits(seq.vectors[0]) ==
        "1101000111111011101011110111111101110010100011010010111010101110111011");
  CHECK(bits(seq.vectors[1]) ==
        "0001011011011111100111010110101011000111011010111101001100100010000110");
}

TEST_CASE("incremental draws reproduce the batch stream") {
  VectorSequence batch = random_vectors(70, 5, 9);
  Prng rng(9);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(random_vector(70, rng) == batch.vectors[i]);
  }
}

TEST_CASE("sequence segments cover the vectors in order") {
  VectorSequence seq = random_vectors(4, 10, 3);
  seq.segment_length = 4;
  CHECK(seq.segment_count() == 3);
  CHECK(seq.segment(0).size() == 4);
  CHECK(seq.segment(1).size() == 4);
  CHECK(seq.segment(2).size() == 2);
  CHECK(seq.segment(0).vectors[0] == seq.vectors[0]);
  CHECK(seq.segment(2).vectors[1] == seq.vectors[9]);
  CHECK_THROWS_AS(seq.segment(3), Error);

  VectorSequence flat = random_vectors(4, 3, 3);
  CHECK(flat.segment_count() == 1);
  CHECK(flat.segment(0).size() == 3);
}

TEST_CASE("vector file round-trip preserves bits, width, and segmenting") {
  VectorSequence seq = random_vectors(12, 6, 77);
  seq.segment_length = 2;
  std::ostringstream out;
  write_vectors(out, seq);
  std::istringstream in(out.str());
  VectorSequence back = read_vectors(in);
  CHECK(back.width == seq.width);
  CHECK(back.vectors == seq.vectors);
  REQUIRE(back.segment_length.has_value());
  CHECK(*back.segment_length == 2);
}

TEST_CASE("vector file parse errors carry line numbers") {
  {
    std::istringstream in("0101\n");
    CHECK_THROWS_AS(read_vectors(in), Error);
    std::istringstream again("0101\n");
    try {
      read_vectors(again);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SyntaxError);
      CHECK(e.line() == 1);
    }
  }
  {
    std::istringstream in("width=4\n010\n");
    try {
      read_vectors(in);
      FAIL("expected WidthMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::WidthMismatch);
      CHECK(e.line() == 2);
    }
  }
  {
    std::istringstream in("width=4\n01x1\n");
    try {
      read_vectors(in);
      FAIL("expected SyntaxError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SyntaxError);
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("derived seeds differ by purpose and are never zero") {
  uint64_t a = derive_seed(1, "candidates");
  uint64_t b = derive_seed(1, "baseline");
  uint64_t c = derive_seed(2, "candidates");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != 0);
  CHECK(b != 0);
  CHECK(derive_seed(1, "candidates") == a);
}
