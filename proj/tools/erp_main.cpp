#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "erp/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equal risk pricing engine"};
  app.require_subcommand(1);
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--preset", preset, "training preset")->check(CLI::IsMember({"desk-scale", "paper-full"}));
  auto* seed_opt = app.add_option("--seed", seed, "master seed; derives every stage seed");
  app.add_option("--out", out_dir, "output directory");
  for (const char* name : {"simulate", "price-rn", "train", "erp", "hedge-stats", "table1", "table2", "table3",
                           "table4", "validate"}) {
    app.add_subcommand(name);
  }
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    erp::cli::ExperimentConfig config = config_path.empty() ? erp::cli::parse_config("{}", preset)
                                                            : erp::cli::load_config(config_path, preset);
    if (*seed_opt) erp::cli::apply_master_seed(config, seed);
    config.validate();
    erp::cli::RunContext ctx;
    ctx.out_dir = out_dir;
    return erp::cli::dispatch(command, config, ctx);
  } catch (const erp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const erp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
