#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace musa {

/// Single logic bit per element (0/1). Vectors and output frames are kept
/// unpacked; bit packing is confined to the parallel fault simulator.
using BitVec = std::vector<uint8_t>;

enum class Errc {
  // bench / netlist
  SyntaxError,
  UnknownGateType,
  UndrivenNet,
  MultiplyDrivenNet,
  CombinationalCycle,
  WidthMismatch,
  // mhdl
  UndeclaredName,
  MultipleDrivers,
  UndrivenSignal,
  InvalidStatement,
  // mutation
  StaleMutant,
  // testgen
  ZeroSeed,
  // metrics
  AllEquivalent,
  RangeError,
  ZeroBaseline,
  // sampling
  EmptyMutantSet,
  NoApplicableOperators,
  // cli
  ConfigError,
  IoError,
  Internal,
};

std::string_view errc_name(Errc c);

/// Project-wide exception. `line` is 1-based when the error points into a
/// source text, -1 otherwise.
class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message, int line = -1)
      : std::runtime_error(format_message(code, message, line)),
        code_(code),
        line_(line) {}

  Errc code() const { return code_; }
  int line() const { return line_; }

private:
  static std::string format_message(Errc code, const std::string& message, int line);

  Errc code_;
  int line_;
};

/// Runs fn(begin, end) over [0, count) split into at most `workers` chunks.
/// Chunk boundaries depend only on (count, workers), so any per-index output
/// written by the chunks is independent of scheduling.
void parallel_for_chunks(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& fn);

/// FNV-1a, used for config hashes in reports.
uint64_t fnv1a64(std::string_view data);
std::string to_hex(uint64_t value);

/// Fixed-point percent with two decimals, e.g. 85.62.
std::string format_fixed2(double value);
/// Three significant figures with explicit sign, e.g. +134, +7.15, -11.1.
std::string format_signed_3sig(double value);

}  // namespace musa
