#include <algorithm>
#include <atomic>
#include <mutex>
#include <utility>
#include <vector>

#include "doctest.h"
#include "musa/common.hpp"

using namespace musa;

TEST_CASE("error carries code and formats line numbers") {
  Error plain(Errc::ConfigError, "bad key");
  CHECK(plain.code() == Errc::ConfigError);
  CHECK(plain.line() == -1);
  CHECK(std::string(plain.what()) == "ConfigError: bad key");

  Error located(Errc::SyntaxError, "unexpected token", 12);
  CHECK(located.line() == 12);
  CHECK(std::string(located.what()) == "SyntaxError at line 12: unexpected token");
}

TEST_CASE("parallel_for_chunks covers every index exactly once") {
  for (unsigned workers : {1u, 2u, 3u, 8u, 64u}) {
    for (std::size_t count : {std::size_t{0}, std::size_t{1}, std::size_t{7}, std::size_t{64},
                              std::size_t{100}}) {
      std::vector<std::atomic<int>> hits(count);
      parallel_for_chunks(count, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) hits[i].fetch_add(1);
      });
      for (std::size_t i = 0; i < count; ++i) CHECK(hits[i].load() == 1);
    }
  }
}

TEST_CASE("parallel_for_chunks boundaries depend only on count and workers") {
  auto record = [](std::size_t count, unsigned workers) {
    std::vector<std::pair<std::size_t, std::size_t>> chunks;
    std::mutex m;
    parallel_for_chunks(count, workers, [&](std::size_t begin, std::size_t end) {
      std::lock_guard<std::mutex> lock(m);
      chunks.emplace_back(begin, end);
    });
    std::sort(chunks.begin(), chunks.end());
    return chunks;
  };
  CHECK(record(10, 3) == record(10, 3));
  CHECK(record(10, 3) == std::vector<std::pair<std::size_t, std::size_t>>{
                             {0, 4}, {4, 7}, {7, 10}});
}

TEST_CASE("fnv1a64 matches reference digests") {
  // Published FNV-1a test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("to_hex pads to sixteen digits") {
  CHECK(to_hex(0) == "0000000000000000");
  CHECK(to_hex(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("fixed two-decimal formatting") {
  CHECK(format_fixed2(85.618) == "85.62");
  CHECK(format_fixed2(0.0) == "0.00");
  CHECK(format_fixed2(-3.126) == "-3.13");
  CHECK(format_fixed2(100.0) == "100.00");
}

TEST_CASE("signed three-significant-figure formatting") {
  CHECK(format_signed_3sig(133.929) == "+134");
  CHECK(format_signed_3sig(7.154) == "+7.15");
  CHECK(format_signed_3sig(7.16) == "+7.16");
  CHECK(format_signed_3sig(87.2432) == "+87.2");
  CHECK(format_signed_3sig(0.0) == "+0");
  CHECK(format_signed_3sig(-11.06) == "-11.1");
  CHECK(format_signed_3sig(1089.1) == "+1090");
  CHECK(format_signed_3sig(446.9) == "+447");
}
