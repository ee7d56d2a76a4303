#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace hwfl::cli;

  CLI::App app{"Hardware-aware federated learning simulator"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults,
               "Print the full config schema with every default and exit");

  Invocation inv;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> k_values;
  std::vector<double> alpha_values;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Experiment config file")
        ->required();
    sub->add_option("--out", out_dir,
                    "Output directory (default: $HWFL_OUT_DIR or hwfl_out)");
    sub->add_option("--seeds", seeds, "Override the config's seed list")
        ->delimiter(',');
  };

  auto* run = app.add_subcommand("run", "Run every listed method");
  add_common(run);
  auto* compare =
      app.add_subcommand("compare", "Compare methods against the first listed");
  add_common(compare);
  auto* sweep_k = app.add_subcommand("sweep-k", "Sweep the participant count");
  add_common(sweep_k);
  sweep_k->add_option("--k-values", k_values, "k values, e.g. 1,2,3")
      ->delimiter(',');
  auto* sweep_w =
      app.add_subcommand("sweep-weights", "Sweep the CPU weight alpha");
  add_common(sweep_w);
  sweep_w->add_option("--alpha-values", alpha_values, "alpha values")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (print_defaults) {
    std::cout << to_json(default_document()).dump(2) << '\n';
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  inv.command = sub->get_name();
  if (!out_dir.empty()) inv.out_dir = out_dir;
  if (sub->count("--seeds")) inv.seeds = seeds;
  if (sub == sweep_k && sub->count("--k-values")) inv.k_values = k_values;
  if (sub == sweep_w && sub->count("--alpha-values"))
    inv.alpha_values = alpha_values;
  return execute(inv, std::cout, std::cerr);
}
