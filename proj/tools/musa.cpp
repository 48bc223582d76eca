#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"

#include "musa/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stuck-at fault simulation and mutation-guided test generation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool pretty = false;

  const std::pair<const char*, const char*> commands[] = {
      {"mutate", "enumerate mutants of a design"},
      {"study", "measure per-operator test efficiency and derive sampling weights"},
      {"compare", "score weighted against uniform mutant sampling across seeds"},
      {"faultsim", "run stuck-at fault simulation for a vector file"},
      {"gen", "generate a mutation-adequate validation set"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON run configuration file")->required();
    sub->add_option("-o,--out-dir", out_dir,
                    "output directory (overrides the config file and MUSA_OUT_DIR)");
    sub->add_flag("--pretty", pretty, "also render the written tables on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    musa::cli::RunConfig cfg = musa::cli::load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.pretty = pretty;
    return musa::cli::run_command(command, cfg, std::cout, std::cerr);
  } catch (const musa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return musa::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
