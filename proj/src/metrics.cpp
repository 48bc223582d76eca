#include "musa/metrics.hpp"

#include <cstdlib>
#include <ostream>

namespace musa::metrics {

MutationScore mutation_score(std::size_t killed, std::size_t generated,
                             std::size_t equivalent) {
  if (generated == 0)
    throw Error(Errc::RangeError, "mutation score needs at least one mutant");
  if (equivalent > generated)
    throw Error(Errc::RangeError, "equivalent count exceeds generated count");
  if (generated == equivalent)
    throw Error(Errc::AllEquivalent, "every mutant is equivalent; score undefined");
  if (killed > generated - equivalent)
    throw Error(Errc::RangeError, "killed count exceeds killable count");
  return MutationScore{killed, generated, equivalent};
}

double delta_fc(const faultsim::CoverageCurve& mfc, const faultsim::CoverageCurve& rfc,
                std::size_t length) {
  if (length == 0) throw Error(Errc::RangeError, "comparison length must be >= 1");
  if (mfc.length() < length || rfc.length() < length)
    throw Error(Errc::RangeError, "coverage curve shorter than comparison length");
  double r = rfc.at(length);
  if (r == 0.0)
    throw Error(Errc::ZeroBaseline, "baseline coverage is zero at the comparison length");
  return 100.0 * (mfc.at(length) - r) / r;
}

DeltaL delta_l(std::size_t detected, std::size_t length,
               faultsim::ExtendableRandomCurve& rfc) {
  if (length == 0) throw Error(Errc::RangeError, "test set length must be >= 1");
  if (rfc.cap() < length)
    throw Error(Errc::RangeError, "baseline cap shorter than the test set");
  auto reached = rfc.first_reaching(detected);
  if (!reached) {
    double cap = static_cast<double>(rfc.cap());
    return DeltaL{100.0 * (cap - static_cast<double>(length)) / cap, true};
  }
  // A zero target is met by the empty prefix; measure against one vector so
  // the ratio stays defined (the baseline is at least as short as any TS).
  double lr = static_cast<double>(*reached == 0 ? 1 : *reached);
  return DeltaL{100.0 * (lr - static_cast<double>(length)) / lr, false};
}

double nlfce(double delta_fc_pct, double delta_l_pct) {
  return delta_fc_pct * delta_l_pct;
}

double round2(double value) {
  double r = std::strtod(format_fixed2(value).c_str(), nullptr);
  if (r == 0.0) r = 0.0;  // never hand a negative zero to reports
  return r;
}

EfficiencyRow efficiency_row(std::string circuit, std::string label, double raw_delta_fc,
                             DeltaL dl) {
  EfficiencyRow row;
  row.circuit = std::move(circuit);
  row.label = std::move(label);
  row.delta_fc_pct = round2(raw_delta_fc);
  row.delta_l_pct = round2(dl.percent);
  row.nlfce = nlfce(*row.delta_fc_pct, row.delta_l_pct);
  row.lower_bound = dl.lower_bound;
  return row;
}

void write_efficiency_tsv(std::ostream& out, const std::vector<EfficiencyRow>& rows) {
  for (const auto& row : rows) {
    if (!row.delta_fc_pct)
      out << "# note: " << row.circuit << "/" << row.label
          << " baseline coverage was zero; delta_fc_pct and nlfce are undefined\n";
    if (row.lower_bound)
      out << "# note: " << row.circuit << "/" << row.label
          << " delta_l_pct is a lower bound (baseline cap reached)\n";
  }
  out << "circuit\toperator\tdelta_fc_pct\tdelta_l_pct\tnlfce\n";
  for (const auto& row : rows) {
    out << row.circuit << '\t' << row.label << '\t';
    if (row.delta_fc_pct)
      out << format_fixed2(*row.delta_fc_pct);
    else
      out << "NA";
    out << '\t' << format_fixed2(row.delta_l_pct) << '\t';
    if (row.nlfce)
      out << format_signed_3sig(*row.nlfce);
    else
      out << "NA";
    out << '\n';
  }
}

void write_compare_tsv(std::ostream& out, const std::vector<CompareRow>& rows) {
  for (const auto& row : rows) {
    if (row.lower_bound && row.seed)
      out << "# note: " << row.circuit << "/" << row.strategy << " seed " << *row.seed
          << " delta_l_pct is a lower bound (baseline cap reached)\n";
  }
  out << "circuit\tstrategy\tseed\tsample_size\tms_pct\tnlfce\n";
  for (const auto& row : rows) {
    out << row.circuit << '\t' << row.strategy << '\t';
    if (row.seed)
      out << *row.seed;
    else
      out << "mean";
    out << '\t' << row.sample_size << '\t' << format_fixed2(100.0 * row.ms) << '\t';
    if (row.nlfce)
      out << format_signed_3sig(*row.nlfce);
    else
      out << "NA";
    out << '\n';
  }
}

}  // namespace musa::metrics
