#include "musa/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace musa {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownGateType: return "UnknownGateType";
    case Errc::UndrivenNet: return "UndrivenNet";
    case Errc::MultiplyDrivenNet: return "MultiplyDrivenNet";
    case Errc::CombinationalCycle: return "CombinationalCycle";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::UndeclaredName: return "UndeclaredName";
    case Errc::MultipleDrivers: return "MultipleDrivers";
    case Errc::UndrivenSignal: return "UndrivenSignal";
    case Errc::InvalidStatement: return "InvalidStatement";
    case Errc::StaleMutant: return "StaleMutant";
    case Errc::ZeroSeed: return "ZeroSeed";
    case Errc::AllEquivalent: return "AllEquivalent";
    case Errc::RangeError: return "RangeError";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::EmptyMutantSet: return "EmptyMutantSet";
    case Errc::NoApplicableOperators: return "NoApplicableOperators";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::Internal: return "Internal";
  }
  return "UnknownError";
}

std::string Error::format_message(Errc code, const std::string& message, int line) {
  std::string out(errc_name(code));
  if (line >= 0) {
    out += " at line ";
    out += std::to_string(line);
  }
  out += ": ";
  out += message;
  return out;
}

void parallel_for_chunks(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (workers <= 1 || count == 1) {
    fn(0, count);
    return;
  }
  std::size_t nchunks = std::min<std::size_t>(workers, count);
  std::size_t base = count / nchunks;
  std::size_t extra = count % nchunks;
  std::vector<std::thread> threads;
  threads.reserve(nchunks);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < nchunks; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    std::size_t end = begin + len;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  for (auto& t : threads) t.join();
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string format_signed_3sig(double value) {
  if (value == 0.0) value = 0.0;  // a negative-zero product prints as +0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  std::string body(buf);
  // Keep large magnitudes in plain decimal ("+1090", not "+1.09e+03").
  if (body.find('e') != std::string::npos) {
    double rounded = std::strtod(buf, nullptr);
    if (std::abs(rounded) >= 1000.0 && std::abs(rounded) < 1e15) {
      std::snprintf(buf, sizeof(buf), "%.0f", rounded);
      body = buf;
    }
  }
  if (!body.empty() && body[0] != '-') body.insert(body.begin(), '+');
  return body;
}

}  // namespace musa
