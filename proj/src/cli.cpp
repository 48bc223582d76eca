#include "musa/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "musa/faultsim.hpp"
#include "musa/metrics.hpp"
#include "musa/mhdl.hpp"
#include "musa/netlist.hpp"
#include "musa/testgen.hpp"

namespace musa::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, origin + ": " + e.what());
  }
}

double number_value(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(Errc::ConfigError, "`" + key + "` must be a number");
  return v.get<double>();
}

uint64_t unsigned_value(const json& v, const std::string& key) {
  if (!v.is_number_unsigned())
    throw Error(Errc::ConfigError, "`" + key + "` must be a non-negative integer");
  return v.get<uint64_t>();
}

std::string string_value(const json& v, const std::string& key) {
  if (!v.is_string()) throw Error(Errc::ConfigError, "`" + key + "` must be a string");
  return v.get<std::string>();
}

std::vector<mutation::OperatorTag> operators_value(const json& v) {
  if (!v.is_array()) throw Error(Errc::ConfigError, "`operators` must be an array of names");
  std::vector<mutation::OperatorTag> out;
  for (const auto& item : v) {
    std::string name = string_value(item, "operators[]");
    auto tag = mutation::parse_operator(name);
    if (!tag) throw Error(Errc::ConfigError, "unknown operator `" + name + "`");
    if (std::find(out.begin(), out.end(), *tag) != out.end())
      throw Error(Errc::ConfigError, "operator `" + name + "` listed twice");
    out.push_back(*tag);
  }
  if (out.empty()) throw Error(Errc::ConfigError, "`operators` must not be empty");
  return out;
}

/// The serialized form every report hash is computed over. Keys are emitted
/// sorted, defaults are materialized, and run-local knobs (out_dir, workers,
/// pretty) are left out because they cannot change report contents.
json canonical_json(const RunConfig& cfg) {
  json j;
  j["design"] = cfg.design;
  j["bench"] = cfg.bench;
  j["vectors"] = cfg.vectors;
  j["weights"] = cfg.weights;
  json ops = json::array();
  for (auto tag : cfg.operators) ops.push_back(std::string(mutation::operator_name(tag)));
  j["operators"] = std::move(ops);
  j["fraction"] = cfg.fraction;
  j["seeds"] = cfg.seeds;
  j["seed"] = cfg.seed;
  j["candidate_budget_factor"] = cfg.candidate_budget_factor;
  j["sequence_length"] = cfg.sequence_length;
  j["max_ts_length"] = cfg.max_ts_length;
  j["comb_exhaustive_bits"] = cfg.comb_exhaustive_bits;
  j["seq_stimulus_bits"] = cfg.seq_stimulus_bits;
  j["seq_steps"] = cfg.seq_steps;
  j["equivalence_budget"] = cfg.equivalence_budget;
  j["baseline_cap"] = cfg.baseline_cap;
  return j;
}

std::string stamp(const RunConfig& cfg) { return "# config=" + to_hex(config_hash(cfg)) + "\n"; }

sampling::PipelineConfig pipeline_config(const RunConfig& cfg) {
  sampling::PipelineConfig p;
  p.operators = cfg.operators;
  p.seed = cfg.seed;
  p.candidate_budget_factor = cfg.candidate_budget_factor;
  p.sequence_length = cfg.sequence_length;
  p.max_ts_length = cfg.max_ts_length;
  p.equivalence.comb_exhaustive_bits = cfg.comb_exhaustive_bits;
  p.equivalence.seq_stimulus_bits = cfg.seq_stimulus_bits;
  p.equivalence.seq_steps = cfg.seq_steps;
  p.equivalence.budget = static_cast<uint32_t>(cfg.equivalence_budget);
  p.equivalence.seed = cfg.seed;
  p.baseline_cap = cfg.baseline_cap;
  p.workers = cfg.workers;
  return p;
}

mhdl::Design load_design(const RunConfig& cfg) {
  if (cfg.design.empty()) throw Error(Errc::ConfigError, "config does not set `design`");
  return mhdl::parse_mhdl(read_file(cfg.design));
}

netlist::Netlist load_bench(const std::string& path) {
  return netlist::parse_bench(read_file(path));
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(Errc::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir / file;
}

void emit(const RunConfig& cfg, const std::string& file, const std::string& text,
          std::ostream& out, std::ostream& err, bool table) {
  auto path = out_path(cfg, file);
  write_file(path, text);
  err << "wrote " << path.string() << "\n";
  if (table && cfg.pretty) out << render_table(text) << "\n";
}

json row_json(const metrics::EfficiencyRow& row) {
  json r;
  r["operator"] = row.label;
  if (row.delta_fc_pct)
    r["delta_fc_pct"] = *row.delta_fc_pct;
  else
    r["delta_fc_pct"] = nullptr;
  r["delta_l_pct"] = row.delta_l_pct;
  if (row.nlfce)
    r["nlfce"] = *row.nlfce;
  else
    r["nlfce"] = nullptr;
  r["delta_l_lower_bound"] = row.lower_bound;
  return r;
}

json weights_json(const sampling::OperatorWeights& weights) {
  json w = json::object();
  for (auto tag : sampling::kOperatorOrder) {
    if (weights.has(tag)) w[std::string(mutation::operator_name(tag))] = weights.get(tag);
  }
  return w;
}

bool has_constants(const mhdl::Design& d) {
  return std::any_of(d.decls.begin(), d.decls.end(),
                     [](const mhdl::Decl& decl) { return decl.kind == mhdl::DeclKind::Const; });
}

/// The study a compare run falls back to when no weights file is supplied.
sampling::OperatorWeights study_weights(const mhdl::Design& d, const sampling::PipelineConfig& p) {
  return sampling::operator_efficiency_study(d, p).weights;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
  json j = parse_json(json_text, origin);
  if (!j.is_object()) throw Error(Errc::ConfigError, origin + ": config must be a JSON object");

  RunConfig cfg;
  bool out_dir_set = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "design") {
      cfg.design = string_value(value, key);
    } else if (key == "bench") {
      cfg.bench = string_value(value, key);
    } else if (key == "vectors") {
      cfg.vectors = string_value(value, key);
    } else if (key == "weights") {
      cfg.weights = string_value(value, key);
    } else if (key == "operators") {
      cfg.operators = operators_value(value);
    } else if (key == "fraction") {
      cfg.fraction = number_value(value, key);
    } else if (key == "seeds") {
      if (!value.is_array()) throw Error(Errc::ConfigError, "`seeds` must be an array");
      cfg.seeds.clear();
      for (const auto& s : value) cfg.seeds.push_back(unsigned_value(s, "seeds[]"));
    } else if (key == "seed") {
      cfg.seed = unsigned_value(value, key);
    } else if (key == "candidate_budget_factor") {
      cfg.candidate_budget_factor = static_cast<std::size_t>(unsigned_value(value, key));
    } else if (key == "sequence_length") {
      cfg.sequence_length = static_cast<uint32_t>(unsigned_value(value, key));
    } else if (key == "max_ts_length") {
      cfg.max_ts_length = static_cast<std::size_t>(unsigned_value(value, key));
    } else if (key == "comb_exhaustive_bits") {
      cfg.comb_exhaustive_bits = static_cast<uint32_t>(unsigned_value(value, key));
    } else if (key == "seq_stimulus_bits") {
      cfg.seq_stimulus_bits = static_cast<uint32_t>(unsigned_value(value, key));
    } else if (key == "seq_steps") {
      cfg.seq_steps = static_cast<uint32_t>(unsigned_value(value, key));
    } else if (key == "equivalence_budget") {
      cfg.equivalence_budget = static_cast<std::size_t>(unsigned_value(value, key));
    } else if (key == "baseline_cap") {
      cfg.baseline_cap = static_cast<std::size_t>(unsigned_value(value, key));
    } else if (key == "out_dir") {
      cfg.out_dir = string_value(value, key);
      out_dir_set = true;
    } else {
      throw Error(Errc::ConfigError, origin + ": unknown config key `" + key + "`");
    }
  }

  if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
    throw Error(Errc::ConfigError, "`fraction` must be in (0, 1]");
  if (cfg.seed == 0) throw Error(Errc::ConfigError, "`seed` must be nonzero");
  for (uint64_t s : cfg.seeds)
    if (s == 0) throw Error(Errc::ConfigError, "`seeds` entries must be nonzero");
  if (cfg.sequence_length == 0)
    throw Error(Errc::ConfigError, "`sequence_length` must be at least 1");

  if (!out_dir_set) {
    if (const char* env = std::getenv("MUSA_OUT_DIR"); env != nullptr && *env != '\0')
      cfg.out_dir = env;
  }
  if (const char* env = std::getenv("MUSA_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    unsigned long w = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || w == 0)
      throw Error(Errc::ConfigError, "MUSA_WORKERS must be a positive integer");
    cfg.workers = static_cast<unsigned>(w);
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  return parse_config(read_file(path), path);
}

uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_json(cfg).dump()); }

sampling::OperatorWeights load_weights_file(const std::string& path) {
  json j = parse_json(read_file(path), path);
  if (!j.is_object()) throw Error(Errc::ConfigError, path + ": weights file must be a JSON object");
  sampling::OperatorWeights w;
  for (const auto& [key, value] : j.items()) {
    if (key == "provenance") {
      w.provenance = string_value(value, key);
    } else if (key == "config_hash") {
      // Informational; a weights file is usable regardless of which run
      // produced it.
    } else if (auto tag = mutation::parse_operator(key)) {
      w.set(*tag, number_value(value, key));
    } else {
      throw Error(Errc::ConfigError, path + ": unknown weights key `" + key + "`");
    }
  }
  if (w.provenance.empty()) w.provenance = "file:" + path;
  return w;
}

void write_weights_file(const std::string& path, const sampling::OperatorWeights& weights,
                        uint64_t hash) {
  json j = weights_json(weights);
  j["provenance"] = weights.provenance;
  j["config_hash"] = to_hex(hash);
  write_file(path, j.dump(2) + "\n");
}

int cmd_mutate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto d = load_design(cfg);
  auto set = mutation::generate_mutants(d, cfg.operators);

  std::ostringstream tsv;
  tsv << stamp(cfg);
  mutation::write_mutants_tsv(tsv, set);
  emit(cfg, d.name + "_mutants.tsv", tsv.str(), out, err, true);

  bool wants_cr = std::find(cfg.operators.begin(), cfg.operators.end(),
                            mutation::OperatorTag::CR) != cfg.operators.end();
  if (wants_cr && !has_constants(d))
    err << "warning: design `" << d.name
        << "` declares no constants, so CR contributed no mutants\n";
  return 0;
}

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto d = load_design(cfg);
  auto set = mutation::generate_mutants(d, cfg.operators);
  if (set.mutants.empty())
    throw Error(Errc::NoApplicableOperators,
                "no requested operator applies to design `" + d.name + "`");

  auto p = pipeline_config(cfg);
  auto eq = p.equivalence;
  eq.seed = testgen::derive_seed(cfg.seed, "equivalence:population");
  mutation::classify_all(d, set, eq, cfg.workers);

  auto candidates = sampling::candidate_pool(
      d, set.size() * cfg.candidate_budget_factor,
      testgen::derive_seed(cfg.seed, "candidates:population"), cfg.sequence_length);
  auto greedy = testgen::generate_validation_set(d, set, candidates,
                                                 {cfg.max_ts_length, cfg.workers});
  mutation::record_kills(set, greedy.matrix);

  std::ostringstream vec;
  vec << stamp(cfg);
  testgen::write_vectors(vec, greedy.ts);
  emit(cfg, d.name + "_validation.vec", vec.str(), out, err, false);

  std::ostringstream tsv;
  tsv << stamp(cfg);
  mutation::write_mutants_tsv(tsv, set);
  emit(cfg, d.name + "_mutants.tsv", tsv.str(), out, err, true);

  err << "kept " << greedy.ts.size() << " of " << candidates.size() << " candidate vectors; "
      << set.killed_count() << "/" << set.size() << " mutants killed\n";
  return 0;
}

int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto d = load_design(cfg);
  auto p = pipeline_config(cfg);
  std::optional<netlist::Netlist> bench;
  if (!cfg.bench.empty()) {
    bench = load_bench(cfg.bench);
    p.target = &*bench;
  }

  auto res = sampling::operator_efficiency_study(d, p);
  uint64_t hash = config_hash(cfg);

  std::vector<metrics::EfficiencyRow> rows;
  rows.reserve(res.operators.size());
  for (const auto& st : res.operators) rows.push_back(st.row);

  std::ostringstream tsv;
  tsv << stamp(cfg);
  metrics::write_efficiency_tsv(tsv, rows);
  emit(cfg, res.circuit + "_study.tsv", tsv.str(), out, err, true);

  json j;
  j["circuit"] = res.circuit;
  j["config_hash"] = to_hex(hash);
  json jrows = json::array();
  for (const auto& st : res.operators) {
    json r = row_json(st.row);
    r["mutants"] = st.set.size();
    r["equivalent"] = st.set.equivalent_count();
    r["killed"] = st.set.killed_count();
    r["ts_length"] = st.ts.size();
    r["faults_detected"] = st.detected;
    jrows.push_back(std::move(r));
  }
  j["rows"] = std::move(jrows);
  j["weights"] = weights_json(res.weights);
  emit(cfg, res.circuit + "_study.json", j.dump(2) + "\n", out, err, false);

  write_weights_file(out_path(cfg, res.circuit + "_weights.json").string(), res.weights, hash);
  err << "wrote " << out_path(cfg, res.circuit + "_weights.json").string() << "\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto d = load_design(cfg);
  auto p = pipeline_config(cfg);
  std::optional<netlist::Netlist> bench;
  if (!cfg.bench.empty()) {
    bench = load_bench(cfg.bench);
    p.target = &*bench;
  }

  sampling::OperatorWeights weights =
      cfg.weights.empty() ? study_weights(d, p) : load_weights_file(cfg.weights);

  auto res = sampling::compare_strategies(d, weights, cfg.fraction, cfg.seeds, p);
  uint64_t hash = config_hash(cfg);

  std::ostringstream tsv;
  tsv << stamp(cfg);
  metrics::write_compare_tsv(tsv, res.rows);
  emit(cfg, res.circuit + "_compare.tsv", tsv.str(), out, err, true);

  json j;
  j["circuit"] = res.circuit;
  j["config_hash"] = to_hex(hash);
  j["population"] = {{"id", res.population.id},
                     {"size", res.population.size()},
                     {"equivalent", res.population.equivalent_count()}};
  j["sample_size"] = res.runs.empty() ? 0 : res.runs.front().plan.sample_size;
  json w = weights_json(weights);
  w["provenance"] = weights.provenance;
  j["weights"] = std::move(w);
  json jrows = json::array();
  for (const auto& row : res.rows) {
    json r;
    r["strategy"] = row.strategy;
    if (row.seed)
      r["seed"] = *row.seed;
    else
      r["seed"] = nullptr;
    r["sample_size"] = row.sample_size;
    r["ms_pct"] = metrics::round2(100.0 * row.ms);
    if (row.nlfce)
      r["nlfce"] = *row.nlfce;
    else
      r["nlfce"] = nullptr;
    r["delta_l_lower_bound"] = row.lower_bound;
    jrows.push_back(std::move(r));
  }
  j["rows"] = std::move(jrows);
  emit(cfg, res.circuit + "_compare.json", j.dump(2) + "\n", out, err, false);
  return 0;
}

int cmd_faultsim(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.bench.empty()) throw Error(Errc::ConfigError, "faultsim requires `bench` in the config");
  if (cfg.vectors.empty())
    throw Error(Errc::ConfigError, "faultsim requires `vectors` in the config");

  auto n = load_bench(cfg.bench);
  auto seq = testgen::read_vectors_file(cfg.vectors);
  auto fl = faultsim::build_fault_list(n);
  auto result = faultsim::fault_simulate(n, seq, fl, cfg.workers);
  auto curve = faultsim::coverage_curve(result, fl);

  std::string base = std::filesystem::path(cfg.bench).stem().string();
  std::ostringstream det;
  det << stamp(cfg);
  faultsim::write_detection_tsv(det, n, fl, result);
  emit(cfg, base + "_detection.tsv", det.str(), out, err, true);

  std::ostringstream cur;
  cur << stamp(cfg);
  faultsim::write_curve_tsv(cur, curve);
  emit(cfg, base + "_curve.tsv", cur.str(), out, err, false);

  err << "detected " << result.detected_count() << "/" << fl.size() << " faults; final coverage "
      << format_fixed2(curve.final_coverage()) << "\n";
  return 0;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::NoApplicableOperators:
    case Errc::EmptyMutantSet:
    case Errc::AllEquivalent:
    case Errc::ZeroBaseline:
      return 3;
    case Errc::StaleMutant:
    case Errc::Internal:
      return 4;
    default:
      return 2;
  }
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  try {
    if (command == "mutate") return cmd_mutate(cfg, out, err);
    if (command == "study") return cmd_study(cfg, out, err);
    if (command == "compare") return cmd_compare(cfg, out, err);
    if (command == "faultsim") return cmd_faultsim(cfg, out, err);
    if (command == "gen") return cmd_gen(cfg, out, err);
    throw Error(Errc::ConfigError, "unknown command `" + command + "`");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

std::string render_table(const std::string& tsv) {
  std::vector<std::string> lines;
  std::istringstream in(tsv);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);

  std::vector<std::size_t> widths;
  std::vector<std::vector<std::string>> cells(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].empty() && lines[i][0] == '#') continue;
    std::size_t start = 0;
    while (true) {
      auto tab = lines[i].find('\t', start);
      std::string cell = lines[i].substr(start, tab == std::string::npos ? tab : tab - start);
      cells[i].push_back(cell);
      if (cells[i].size() > widths.size()) widths.push_back(0);
      widths[cells[i].size() - 1] = std::max(widths[cells[i].size() - 1], cell.size());
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
  }

  std::ostringstream outs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].empty() && lines[i][0] == '#') {
      outs << lines[i] << "\n";
      continue;
    }
    std::string rendered;
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      if (c > 0) rendered += "  ";
      rendered += cells[i][c];
      if (c + 1 < cells[i].size())
        rendered.append(widths[c] - cells[i][c].size(), ' ');
    }
    outs << rendered << "\n";
  }
  return outs.str();
}

}  // namespace musa::cli
