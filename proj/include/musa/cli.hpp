#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "musa/mutation.hpp"
#include "musa/sampling.hpp"

namespace musa::cli {

/// Everything a run needs, loaded from a JSON config file. Anything that can
/// change report contents lives here so a run is reproducible from the file
/// alone; presentation knobs (out_dir, pretty) and the worker count are
/// deliberately outside the reproducibility contract.
struct RunConfig {
  // Input paths. `design` drives mutate/study/compare/gen; `bench` is the
  // faultsim target and, when present, replaces the design's own elaboration
  // as the coverage reference; `vectors` feeds faultsim; `weights` lets
  // compare reuse a previously written weights file instead of rerunning the
  // study.
  std::string design;
  std::string bench;
  std::string vectors;
  std::string weights;

  std::vector<mutation::OperatorTag> operators{mutation::kAllOperators.begin(),
                                               mutation::kAllOperators.end()};
  double fraction = 0.10;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  uint64_t seed = 1;
  std::size_t candidate_budget_factor = 64;
  uint32_t sequence_length = 8;
  std::size_t max_ts_length = 0;
  uint32_t comb_exhaustive_bits = 16;
  uint32_t seq_stimulus_bits = 16;
  uint32_t seq_steps = 8;
  std::size_t equivalence_budget = 64;
  std::size_t baseline_cap = 1000;

  // Not part of the config hash.
  std::string out_dir = ".";
  unsigned workers = 1;
  bool pretty = false;
};

/// Parses a config file. Unknown keys are rejected so typos fail loudly.
/// MUSA_OUT_DIR supplies out_dir when the file does not set it, and
/// MUSA_WORKERS sets the worker count (it is not a file key at all, since it
/// may never change results).
RunConfig load_config_file(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin = "<config>");

/// Hash of the canonical serialized config (paths, operators, seeds, all
/// numeric knobs; not out_dir/workers/pretty). Stamped into every report so
/// outputs can be traced back to the exact configuration that produced them.
uint64_t config_hash(const RunConfig& cfg);

/// Weights file round-trip. The file is a flat JSON object mapping operator
/// names to weights, plus `provenance` and `config_hash` entries.
sampling::OperatorWeights load_weights_file(const std::string& path);
void write_weights_file(const std::string& path, const sampling::OperatorWeights& weights,
                        uint64_t hash);

/// Commands. Each writes its reports under cfg.out_dir, notes the files it
/// wrote on `err`, and returns 0; failures are reported by throwing Error.
/// When cfg.pretty is set, the primary table is also rendered on `out` with
/// aligned columns.
int cmd_mutate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_faultsim(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Dispatches one of the commands above by name, mapping exceptions to the
/// process exit contract: 0 ok, 2 bad input or configuration, 3 a valid run
/// that has no defined result (no applicable operators, all mutants
/// equivalent, zero baseline), 4 broken internal invariants.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out,
                std::ostream& err);
int exit_code_for(Errc code);

/// Renders TSV text as an aligned table. Comment lines pass through.
std::string render_table(const std::string& tsv);

}  // namespace musa::cli
