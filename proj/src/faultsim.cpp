#include "musa/faultsim.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "musa/common.hpp"

namespace musa::faultsim {

using netlist::Gate;
using netlist::GateKind;
using netlist::Netlist;
using netlist::NetId;

namespace {

void check_width(const Netlist& n, const testgen::VectorSequence& seq) {
  if (seq.width != n.inputs.size()) {
    throw Error(Errc::WidthMismatch, "sequence width " + std::to_string(seq.width) +
                                         " does not match " + std::to_string(n.inputs.size()) +
                                         " netlist inputs");
  }
}

/// Mirrors netlist::Simulator stepping with one fault value forced at its
/// site on every step. Branch faults override a single consumer pin, so a
/// gate reading the same net twice keeps the healthy value on the other pin.
class FaultyMachine {
public:
  FaultyMachine(const Netlist& n, const Fault& f)
      : n_(n), f_(f), forced_(f.stuck1 ? 1 : 0), values_(n.net_names.size(), 0),
        state_(n.dffs.size(), 0) {}

  const std::vector<uint8_t>& state() const { return state_; }
  void set_state(const std::vector<uint8_t>& s) { state_ = s; }

  /// Advances one step and reports whether the outputs differ from the
  /// good machine's outputs for the same step.
  bool step_differs(const BitVec& input, const BitVec& good_output) {
    for (std::size_t i = 0; i < input.size(); ++i) values_[n_.inputs[i]] = input[i] & 1u;
    for (std::size_t i = 0; i < n_.dffs.size(); ++i) values_[n_.dffs[i].state] = state_[i];
    if (f_.site == Fault::Site::NetDriver) values_[f_.net] = forced_;
    for (uint32_t gi : n_.schedule) {
      const Gate& g = n_.gates[gi];
      uint8_t v;
      if (f_.site == Fault::Site::GatePin && f_.index == gi) {
        v = eval_with_forced_pin(g);
      } else {
        v = netlist::eval_gate(g.kind, values_.data(), g.inputs);
      }
      if (f_.site == Fault::Site::NetDriver && f_.net == g.output) v = forced_;
      values_[g.output] = v;
    }
    bool differs = false;
    for (std::size_t i = 0; i < n_.outputs.size(); ++i) {
      if (values_[n_.outputs[i]] != good_output[i]) {
        differs = true;
        break;
      }
    }
    for (std::size_t i = 0; i < n_.dffs.size(); ++i) {
      uint8_t v = values_[n_.dffs[i].data];
      if (f_.site == Fault::Site::DffPin && f_.index == i) v = forced_;
      state_[i] = v;
    }
    return differs;
  }

private:
  uint8_t eval_with_forced_pin(const Gate& g) {
    pin_values_.resize(g.inputs.size());
    pin_ids_.resize(g.inputs.size());
    std::iota(pin_ids_.begin(), pin_ids_.end(), NetId{0});
    for (std::size_t p = 0; p < g.inputs.size(); ++p) {
      pin_values_[p] = (p == f_.pin) ? forced_ : values_[g.inputs[p]];
    }
    return netlist::eval_gate(g.kind, pin_values_.data(), pin_ids_);
  }

  const Netlist& n_;
  const Fault& f_;
  uint8_t forced_;
  std::vector<uint8_t> values_;
  std::vector<uint8_t> state_;
  std::vector<uint8_t> pin_values_;
  std::vector<NetId> pin_ids_;
};

/// Runs one fault over seq.vectors[from, from+count) against precomputed
/// good outputs for those steps; 1-based detection indices count from the
/// start of the whole sequence. state_io carries DFF state across calls.
std::optional<uint32_t> run_one_fault(const Netlist& n, const Fault& f,
                                      const std::vector<BitVec>& vectors, std::size_t from,
                                      std::size_t count, const std::vector<BitVec>& good_outputs,
                                      std::vector<uint8_t>* state_io) {
  FaultyMachine machine(n, f);
  if (state_io && !state_io->empty()) machine.set_state(*state_io);
  std::optional<uint32_t> detect;
  for (std::size_t i = 0; i < count; ++i) {
    if (machine.step_differs(vectors[from + i], good_outputs[i])) {
      detect = static_cast<uint32_t>(from + i + 1);
      break;
    }
  }
  if (state_io) *state_io = machine.state();
  return detect;
}

uint64_t eval_gate_words(const Gate& g, const uint64_t* words, int forced_pin, uint64_t forced) {
  auto pin = [&](std::size_t p) -> uint64_t {
    return static_cast<int>(p) == forced_pin ? forced : words[g.inputs[p]];
  };
  switch (g.kind) {
    case GateKind::And:
    case GateKind::Nand: {
      uint64_t acc = ~uint64_t{0};
      for (std::size_t p = 0; p < g.inputs.size(); ++p) acc &= pin(p);
      return g.kind == GateKind::And ? acc : ~acc;
    }
    case GateKind::Or:
    case GateKind::Nor: {
      uint64_t acc = 0;
      for (std::size_t p = 0; p < g.inputs.size(); ++p) acc |= pin(p);
      return g.kind == GateKind::Or ? acc : ~acc;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      uint64_t acc = 0;
      for (std::size_t p = 0; p < g.inputs.size(); ++p) acc ^= pin(p);
      return g.kind == GateKind::Xor ? acc : ~acc;
    }
    case GateKind::Not:
      return ~pin(0);
    case GateKind::Buf:
      return pin(0);
  }
  return 0;
}

/// Good-machine net values for consecutive 64-vector batches, plus the
/// lane mask of the partial last batch. Combinational only.
struct WordBatches {
  std::size_t base = 0;  // index of the first packed vector
  std::vector<std::vector<uint64_t>> nets;
  std::vector<uint64_t> masks;
};

WordBatches pack_good_words(const Netlist& n, const std::vector<BitVec>& vectors,
                            std::size_t from, std::size_t count) {
  WordBatches wb;
  wb.base = from;
  std::size_t batches = (count + 63) / 64;
  wb.nets.assign(batches, std::vector<uint64_t>(n.net_names.size(), 0));
  wb.masks.assign(batches, 0);
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t lanes = std::min<std::size_t>(64, count - b * 64);
    wb.masks[b] = lanes == 64 ? ~uint64_t{0} : (uint64_t{1} << lanes) - 1;
    auto& w = wb.nets[b];
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      uint64_t packed = 0;
      for (std::size_t k = 0; k < lanes; ++k) {
        packed |= uint64_t{vectors[from + b * 64 + k][i] & 1u} << k;
      }
      w[n.inputs[i]] = packed;
    }
    for (uint32_t gi : n.schedule) {
      const Gate& g = n.gates[gi];
      w[g.output] = eval_gate_words(g, w.data(), -1, 0);
    }
  }
  return wb;
}

std::optional<uint32_t> detect_words(const Netlist& n, const Fault& f, const WordBatches& wb,
                                     std::vector<uint64_t>& scratch) {
  const uint64_t forced = f.stuck1 ? ~uint64_t{0} : 0;
  for (std::size_t b = 0; b < wb.nets.size(); ++b) {
    const auto& good = wb.nets[b];
    scratch = good;  // primary-input words are already loaded
    if (f.site == Fault::Site::NetDriver &&
        n.drivers[f.net].kind == netlist::Driver::Kind::PrimaryInput) {
      scratch[f.net] = forced;
    }
    for (uint32_t gi : n.schedule) {
      const Gate& g = n.gates[gi];
      int forced_pin = (f.site == Fault::Site::GatePin && f.index == gi)
                           ? static_cast<int>(f.pin)
                           : -1;
      uint64_t v = eval_gate_words(g, scratch.data(), forced_pin, forced);
      if (f.site == Fault::Site::NetDriver && f.net == g.output) v = forced;
      scratch[g.output] = v;
    }
    uint64_t diff = 0;
    for (NetId out : n.outputs) diff |= scratch[out] ^ good[out];
    diff &= wb.masks[b];
    if (diff != 0) {
      return static_cast<uint32_t>(wb.base + b * 64 + std::countr_zero(diff) + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string fault_location(const Netlist& n, const Fault& f) {
  switch (f.site) {
    case Fault::Site::NetDriver:
      return n.net_name(f.net);
    case Fault::Site::GatePin:
      return n.net_name(f.net) + "->" + n.net_name(n.gates[f.index].output) + ":" +
             std::to_string(f.pin);
    case Fault::Site::DffPin:
      return n.net_name(f.net) + "->" + n.net_name(n.dffs[f.index].state) + ":d";
  }
  return {};
}

std::string fault_polarity(const Fault& f) { return f.stuck1 ? "sa1" : "sa0"; }

FaultList build_fault_list(const Netlist& n) {
  FaultList fl;
  fl.netlist_name = n.name;
  auto both = [&fl](Fault f) {
    f.stuck1 = false;
    fl.faults.push_back(f);
    f.stuck1 = true;
    fl.faults.push_back(f);
  };
  for (uint32_t gi = 0; gi < n.gates.size(); ++gi) {
    const Gate& g = n.gates[gi];
    for (uint32_t p = 0; p < g.inputs.size(); ++p) {
      both({Fault::Site::GatePin, g.inputs[p], gi, p, false});
    }
  }
  for (uint32_t di = 0; di < n.dffs.size(); ++di) {
    both({Fault::Site::DffPin, n.dffs[di].data, di, 0, false});
  }
  for (const Gate& g : n.gates) both({Fault::Site::NetDriver, g.output, 0, 0, false});
  for (const auto& d : n.dffs) both({Fault::Site::NetDriver, d.state, 0, 0, false});
  for (NetId in : n.inputs) {
    if (n.fanouts[in].size() >= 2) both({Fault::Site::NetDriver, in, 0, 0, false});
  }
  return fl;
}

std::size_t DetectionResult::detected_count() const {
  return static_cast<std::size_t>(
      std::count_if(first_detect.begin(), first_detect.end(),
                    [](const std::optional<uint32_t>& d) { return d.has_value(); }));
}

std::size_t DetectionResult::detected_by(std::size_t t) const {
  return static_cast<std::size_t>(
      std::count_if(first_detect.begin(), first_detect.end(),
                    [t](const std::optional<uint32_t>& d) { return d && *d <= t; }));
}

DetectionResult serial_fault_simulate(const Netlist& n, const testgen::VectorSequence& seq,
                                      const FaultList& fl, unsigned workers) {
  check_width(n, seq);
  DetectionResult result;
  result.num_vectors = static_cast<uint32_t>(seq.size());
  result.first_detect.assign(fl.size(), std::nullopt);
  if (seq.empty() || fl.size() == 0) return result;
  const std::vector<BitVec> good = netlist::good_simulate(n, seq);
  parallel_for_chunks(fl.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      result.first_detect[fi] =
          run_one_fault(n, fl.faults[fi], seq.vectors, 0, seq.size(), good, nullptr);
    }
  });
  return result;
}

DetectionResult parallel_fault_simulate(const Netlist& n, const testgen::VectorSequence& seq,
                                        const FaultList& fl, unsigned workers) {
  if (n.sequential()) return serial_fault_simulate(n, seq, fl, workers);
  check_width(n, seq);
  DetectionResult result;
  result.num_vectors = static_cast<uint32_t>(seq.size());
  result.first_detect.assign(fl.size(), std::nullopt);
  if (seq.empty() || fl.size() == 0) return result;
  const WordBatches wb = pack_good_words(n, seq.vectors, 0, seq.size());
  parallel_for_chunks(fl.size(), workers, [&](std::size_t begin, std::size_t end) {
    std::vector<uint64_t> scratch;
    for (std::size_t fi = begin; fi < end; ++fi) {
      result.first_detect[fi] = detect_words(n, fl.faults[fi], wb, scratch);
    }
  });
  return result;
}

DetectionResult fault_simulate(const Netlist& n, const testgen::VectorSequence& seq,
                               const FaultList& fl, unsigned workers) {
  return parallel_fault_simulate(n, seq, fl, workers);
}

double CoverageCurve::at(std::size_t t) const {
  if (t == 0 || points.empty()) return 0.0;
  return points[std::min(t, points.size()) - 1];
}

CoverageCurve coverage_curve(const DetectionResult& result, const FaultList& fl) {
  CoverageCurve curve;
  curve.points.assign(result.num_vectors, 0.0);
  if (fl.size() == 0 || result.num_vectors == 0) return curve;
  std::vector<std::size_t> newly(result.num_vectors + 1, 0);
  for (const auto& d : result.first_detect) {
    if (d) ++newly[*d];
  }
  std::size_t acc = 0;
  for (uint32_t t = 1; t <= result.num_vectors; ++t) {
    acc += newly[t];
    curve.points[t - 1] = static_cast<double>(acc) / static_cast<double>(fl.size());
  }
  return curve;
}

void write_detection_tsv(std::ostream& out, const Netlist& n, const FaultList& fl,
                         const DetectionResult& result) {
  out << "fault_id\tlocation\tpolarity\tfirst_detect_index\n";
  for (std::size_t i = 0; i < fl.size(); ++i) {
    out << i << '\t' << fault_location(n, fl.faults[i]) << '\t' << fault_polarity(fl.faults[i])
        << '\t';
    if (result.first_detect[i]) out << *result.first_detect[i];
    out << '\n';
  }
}

void write_curve_tsv(std::ostream& out, const CoverageCurve& curve) {
  out << "t\tcoverage\n";
  for (std::size_t t = 1; t <= curve.points.size(); ++t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", curve.points[t - 1]);
    out << t << '\t' << buf << '\n';
  }
}

ExtendableRandomCurve::ExtendableRandomCurve(const Netlist& n, const FaultList& fl, uint64_t seed,
                                             std::size_t cap, unsigned workers)
    : n_(n), fl_(fl), seed_(seed), cap_(cap), workers_(workers), prng_(seed), good_(n) {
  generated_.width = static_cast<uint32_t>(n.inputs.size());
  generated_.provenance = testgen::RandomProvenance{seed};
  first_detect_.assign(fl.size(), std::nullopt);
  if (n.sequential()) {
    faulty_states_.assign(fl.size(), BitVec(n.dffs.size(), 0));
  }
}

ExtendableRandomCurve::~ExtendableRandomCurve() = default;

void ExtendableRandomCurve::extend_to(std::size_t t) {
  t = std::min(t, cap_);
  if (t <= generated_.size()) return;
  const std::size_t from = generated_.size();
  const std::size_t count = t - from;
  for (std::size_t i = 0; i < count; ++i) {
    generated_.vectors.push_back(testgen::random_vector(generated_.width, prng_));
  }
  std::vector<std::size_t> live;
  for (std::size_t fi = 0; fi < fl_.size(); ++fi) {
    if (!first_detect_[fi]) live.push_back(fi);
  }
  if (!live.empty()) {
    if (n_.sequential()) {
      std::vector<BitVec> good_outputs;
      good_outputs.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        good_outputs.push_back(good_.step(generated_.vectors[from + i]));
      }
      parallel_for_chunks(live.size(), workers_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t li = begin; li < end; ++li) {
          std::size_t fi = live[li];
          first_detect_[fi] = run_one_fault(n_, fl_.faults[fi], generated_.vectors, from, count,
                                            good_outputs, &faulty_states_[fi]);
        }
      });
    } else {
      const WordBatches wb = pack_good_words(n_, generated_.vectors, from, count);
      parallel_for_chunks(live.size(), workers_, [&](std::size_t begin, std::size_t end) {
        std::vector<uint64_t> scratch;
        for (std::size_t li = begin; li < end; ++li) {
          std::size_t fi = live[li];
          first_detect_[fi] = detect_words(n_, fl_.faults[fi], wb, scratch);
        }
      });
    }
  }
  std::vector<std::size_t> newly(count + 1, 0);
  for (std::size_t fi : live) {
    if (first_detect_[fi]) ++newly[*first_detect_[fi] - from];
  }
  std::size_t acc = from > 0 ? detected_prefix_[from - 1] : 0;
  detected_prefix_.resize(t);
  curve_.points.resize(t);
  const double total = fl_.size() == 0 ? 1.0 : static_cast<double>(fl_.size());
  for (std::size_t i = 1; i <= count; ++i) {
    acc += newly[i];
    detected_prefix_[from + i - 1] = acc;
    curve_.points[from + i - 1] = static_cast<double>(acc) / total;
  }
}

void ExtendableRandomCurve::ensure_length(std::size_t t) { extend_to(t); }

double ExtendableRandomCurve::at(std::size_t t) {
  if (t == 0) return 0.0;
  extend_to(t);
  return curve_.at(t);
}

std::size_t ExtendableRandomCurve::detected_by(std::size_t t) {
  if (t == 0) return 0;
  extend_to(t);
  std::size_t idx = std::min(t, detected_prefix_.size());
  return idx == 0 ? 0 : detected_prefix_[idx - 1];
}

std::optional<std::size_t> ExtendableRandomCurve::first_reaching(std::size_t detected) {
  if (detected == 0) return 0;
  std::size_t probe = std::max<std::size_t>(std::max<std::size_t>(current_length(), 64), 1);
  for (;;) {
    extend_to(probe);
    if (!detected_prefix_.empty() && detected_prefix_.back() >= detected) break;
    if (current_length() >= cap_) break;
    probe = std::min(cap_, probe * 2);
  }
  for (std::size_t t = 1; t <= detected_prefix_.size(); ++t) {
    if (detected_prefix_[t - 1] >= detected) return t;
  }
  return std::nullopt;
}

}  // namespace musa::faultsim
