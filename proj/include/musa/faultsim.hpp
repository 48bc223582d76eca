#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "musa/netlist.hpp"
#include "musa/vectors.hpp"

namespace musa::faultsim {

/// Single stuck-at fault. Stem faults sit on a net at its driver; branch
/// faults sit on one consumer pin and leave the other branches healthy.
struct Fault {
  enum class Site { NetDriver, GatePin, DffPin } site = Site::NetDriver;
  netlist::NetId net = netlist::kNoNet;  // NetDriver: faulted net; pin sites: the source net
  uint32_t index = 0;                    // gate or dff index for pin sites
  uint32_t pin = 0;                      // pin position for GatePin
  bool stuck1 = false;

  bool operator==(const Fault& other) const = default;
};

std::string fault_location(const netlist::Netlist& n, const Fault& f);
std::string fault_polarity(const Fault& f);

struct FaultList {
  std::string netlist_name;
  std::vector<Fault> faults;

  std::size_t size() const { return faults.size(); }
};

/// Uncollapsed enumeration, in a fixed traversal order: branch faults on
/// every gate input pin and every DFF data pin, then stem faults on every
/// gate- and DFF-driven net, then stems on primary-input nets feeding two
/// or more pins (a single-branch input stem would duplicate its branch).
/// Each site contributes sa0 then sa1.
FaultList build_fault_list(const netlist::Netlist& n);

/// Per fault: 1-based index of the first vector whose outputs differ from
/// the good machine, or nullopt if the sequence never detects it.
struct DetectionResult {
  uint32_t num_vectors = 0;
  std::vector<std::optional<uint32_t>> first_detect;

  std::size_t detected_count() const;
  /// Faults detected by the first t vectors (t may exceed num_vectors).
  std::size_t detected_by(std::size_t t) const;
};

DetectionResult serial_fault_simulate(const netlist::Netlist& n,
                                      const testgen::VectorSequence& seq, const FaultList& fl,
                                      unsigned workers = 1);

/// Packs 64 vectors per simulation pass for combinational netlists and
/// produces a bit-identical DetectionResult. Sequential netlists fall back
/// to the serial path.
DetectionResult parallel_fault_simulate(const netlist::Netlist& n,
                                        const testgen::VectorSequence& seq, const FaultList& fl,
                                        unsigned workers = 1);

/// Dispatches to the packed path when it applies, serial otherwise.
DetectionResult fault_simulate(const netlist::Netlist& n, const testgen::VectorSequence& seq,
                               const FaultList& fl, unsigned workers = 1);

/// points[t-1] = fraction of the fault list detected by the first t vectors.
struct CoverageCurve {
  std::vector<double> points;

  double at(std::size_t t) const;  // t is 1-based; at(0) == 0
  double final_coverage() const { return points.empty() ? 0.0 : points.back(); }
  std::size_t length() const { return points.size(); }
};

CoverageCurve coverage_curve(const DetectionResult& result, const FaultList& fl);

void write_detection_tsv(std::ostream& out, const netlist::Netlist& n, const FaultList& fl,
                         const DetectionResult& result);
void write_curve_tsv(std::ostream& out, const CoverageCurve& curve);

/// Random-baseline curve that grows on demand: vectors come from one
/// continuous seeded stream and are appended until the requested length
/// (bounded by `cap`), so any access pattern realizes the same curve as a
/// single full-length run. Extensions re-simulate only still-undetected
/// faults; sequential state is carried across extensions per fault.
/// Queries by detected count stay exact where a fraction comparison would
/// hinge on float rounding.
class ExtendableRandomCurve {
public:
  ExtendableRandomCurve(const netlist::Netlist& n, const FaultList& fl, uint64_t seed,
                        std::size_t cap, unsigned workers = 1);
  ~ExtendableRandomCurve();

  ExtendableRandomCurve(const ExtendableRandomCurve&) = delete;
  ExtendableRandomCurve& operator=(const ExtendableRandomCurve&) = delete;

  void ensure_length(std::size_t t);
  double at(std::size_t t);                 // 1-based, t <= cap
  std::size_t detected_by(std::size_t t);   // extends as needed
  /// Smallest t <= cap detecting at least `detected` faults, or nullopt
  /// after the whole capped stream falls short.
  std::optional<std::size_t> first_reaching(std::size_t detected);
  std::size_t cap() const { return cap_; }
  uint64_t seed() const { return seed_; }
  std::size_t current_length() const { return generated_.size(); }
  const CoverageCurve& realized() const { return curve_; }

private:
  void extend_to(std::size_t t);

  const netlist::Netlist& n_;
  const FaultList& fl_;
  uint64_t seed_;
  std::size_t cap_;
  unsigned workers_;
  testgen::Prng prng_;
  testgen::VectorSequence generated_;
  std::vector<std::optional<uint32_t>> first_detect_;
  std::vector<std::size_t> detected_prefix_;  // detected_prefix_[t-1] = count by t
  CoverageCurve curve_;
  netlist::Simulator good_;
  std::vector<BitVec> faulty_states_;  // per fault, sequential netlists only
};

}  // namespace musa::faultsim
