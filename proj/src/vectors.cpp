#include "musa/vectors.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace musa::testgen {

Prng::Prng(uint64_t seed) : state_(seed) {
  if (seed == 0) throw Error(Errc::ZeroSeed, "prng seed must be nonzero");
}

uint64_t Prng::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

uint64_t Prng::next_below(uint64_t n) {
  if (n < 2) return 0;
  uint64_t bound = ~uint64_t{0} - (~uint64_t{0} % n);
  for (;;) {
    uint64_t v = next();
    if (v < bound) return v % n;
  }
}

std::size_t VectorSequence::segment_count() const {
  if (!segment_length || *segment_length == 0 || vectors.empty()) {
    return vectors.empty() ? 0 : 1;
  }
  return (vectors.size() + *segment_length - 1) / *segment_length;
}

VectorSequence VectorSequence::segment(std::size_t i) const {
  VectorSequence out;
  out.width = width;
  out.provenance = provenance;
  if (!segment_length || *segment_length == 0) {
    if (i != 0) throw Error(Errc::RangeError, "segment index out of range");
    out.vectors = vectors;
    return out;
  }
  std::size_t begin = i * *segment_length;
  if (begin >= vectors.size()) throw Error(Errc::RangeError, "segment index out of range");
  std::size_t end = std::min(vectors.size(), begin + *segment_length);
  out.vectors.assign(vectors.begin() + begin, vectors.begin() + end);
  return out;
}

void VectorSequence::append(const BitVec& v) {
  if (v.size() != width) throw Error(Errc::WidthMismatch, "vector width mismatch on append");
  vectors.push_back(v);
}

std::string VectorSequence::provenance_string() const {
  if (const auto* r = std::get_if<RandomProvenance>(&provenance)) {
    return "random seed=" + std::to_string(r->seed);
  }
  if (const auto* m = std::get_if<MutationAdequateProvenance>(&provenance)) {
    return "mutation-adequate set=" + m->mutant_set_id;
  }
  return "file " + std::get<FileProvenance>(provenance).path;
}

BitVec random_vector(uint32_t width, Prng& rng) {
  const uint32_t words_per_vector = (width + 63) / 64;
  std::vector<uint64_t> words(words_per_vector);
  for (auto& w : words) w = rng.next();
  BitVec v(width);
  for (uint32_t j = 0; j < width; ++j) {
    v[j] = static_cast<uint8_t>((words[j / 64] >> (63 - (j % 64))) & 1u);
  }
  return v;
}

VectorSequence random_vectors(uint32_t width, std::size_t n, uint64_t seed) {
  if (width < 1) throw Error(Errc::RangeError, "vector width must be >= 1");
  Prng prng(seed);
  VectorSequence seq;
  seq.width = width;
  seq.provenance = RandomProvenance{seed};
  seq.vectors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seq.vectors.push_back(random_vector(width, prng));
  return seq;
}

namespace {

bool parse_directive_comment(const std::string& line, VectorSequence& seq) {
  // Comments of the form `# key: value` written by write_vectors.
  auto pos = line.find(':');
  if (pos == std::string::npos) return false;
  std::string key = line.substr(1, pos - 1);
  std::string value = line.substr(pos + 1);
  auto trim = [](std::string& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  };
  trim(key);
  trim(value);
  if (key == "segment-length") {
    seq.segment_length = static_cast<uint32_t>(std::stoul(value));
    return true;
  }
  return false;
}

}  // namespace

VectorSequence read_vectors(std::istream& in, const std::string& origin) {
  VectorSequence seq;
  seq.provenance = FileProvenance{origin};
  std::string line;
  int lineno = 0;
  bool have_width = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      parse_directive_comment(line, seq);
      continue;
    }
    if (!have_width) {
      if (line.rfind("width=", 0) != 0) {
        throw Error(Errc::SyntaxError, "expected `width=<n>` header in vector file", lineno);
      }
      unsigned long w = 0;
      try {
        w = std::stoul(line.substr(6));
      } catch (const std::exception&) {
        throw Error(Errc::SyntaxError, "bad width in vector file header", lineno);
      }
      if (w < 1) throw Error(Errc::SyntaxError, "vector width must be >= 1", lineno);
      seq.width = static_cast<uint32_t>(w);
      have_width = true;
      continue;
    }
    BitVec v;
    v.reserve(line.size());
    for (char c : line) {
      if (c == '0' || c == '1') {
        v.push_back(static_cast<uint8_t>(c - '0'));
      } else if (c == ' ' || c == '\t') {
        continue;
      } else {
        throw Error(Errc::SyntaxError, std::string("unexpected character `") + c + "` in vector row",
                    lineno);
      }
    }
    if (v.size() != seq.width) {
      throw Error(Errc::WidthMismatch,
                  "vector row has " + std::to_string(v.size()) + " bits, expected " +
                      std::to_string(seq.width),
                  lineno);
    }
    seq.vectors.push_back(std::move(v));
  }
  if (!have_width) throw Error(Errc::SyntaxError, "vector file missing `width=<n>` header");
  return seq;
}

VectorSequence read_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open vector file: " + path);
  return read_vectors(in, path);
}

void write_vectors(std::ostream& out, const VectorSequence& seq) {
  out << "# provenance: " << seq.provenance_string() << "\n";
  if (seq.segment_length) out << "# segment-length: " << *seq.segment_length << "\n";
  out << "width=" << seq.width << "\n";
  for (const auto& v : seq.vectors) {
    std::string row(v.size(), '0');
    for (std::size_t i = 0; i < v.size(); ++i) row[i] = v[i] ? '1' : '0';
    out << row << "\n";
  }
}

void write_vectors_file(const std::string& path, const VectorSequence& seq) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write vector file: " + path);
  write_vectors(out, seq);
}

uint64_t derive_seed(uint64_t master, std::string_view purpose) {
  uint64_t h = fnv1a64(purpose) ^ master;
  // splitmix64 finalizer to decorrelate nearby masters
  h += 0x9E3779B97F4A7C15ULL;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  h = h ^ (h >> 31);
  return h == 0 ? 0x9E3779B97F4A7C15ULL : h;
}

}  // namespace musa::testgen
