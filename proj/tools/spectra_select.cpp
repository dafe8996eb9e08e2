#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specsel/cli.hpp"

namespace {

struct FlagState {
  std::string config_path;
  std::string class_name;
  std::string method;
  std::size_t top_n = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool has_class = false, has_method = false, has_top_n = false, has_seed = false,
       has_out = false;
};

void add_common_flags(CLI::App& sub, FlagState& flags) {
  sub.add_option("--config", flags.config_path, "flat JSON config file")->required();
  sub.add_option("--class", flags.class_name, "object class to process")
      ->each([&](const std::string&) { flags.has_class = true; });
  sub.add_option("--method", flags.method, "origin, fi, pi, or pca")
      ->each([&](const std::string&) { flags.has_method = true; });
  sub.add_option("--top-n", flags.top_n, "channels or components to keep")
      ->each([&](const std::string&) { flags.has_top_n = true; });
  sub.add_option("--seed", flags.seed, "top-level random seed")
      ->each([&](const std::string&) { flags.has_seed = true; });
  sub.add_option("--out", flags.out_dir, "output directory")
      ->each([&](const std::string&) { flags.has_out = true; });
}

specsel::cli::RunConfig build_config(const FlagState& flags) {
  specsel::cli::RunConfig cfg;
  specsel::cli::apply_config_file(cfg, flags.config_path);
  if (flags.has_class) cfg.class_name = flags.class_name;
  if (flags.has_method) cfg.method = flags.method;
  if (flags.has_top_n) cfg.top_n = flags.top_n;
  if (flags.has_seed) cfg.seed = flags.seed;
  if (flags.has_out) cfg.out_dir = flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperspectral channel selection and anomaly scoring"};
  app.require_subcommand(1);

  FlagState flags;
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "synthesize and cache scaled spectral cubes for a class"},
      {"rank", "rank channels (fi, pi) or fit the pca model"},
      {"train", "train the anomaly scorer on reduced training cubes"},
      {"eval", "score the test cubes and report auroc"},
      {"bench", "time origin versus the reduced pipeline"},
      {"plot", "render the channel importance chart"},
      {"pipeline", "run synth, rank, train, eval, and bench in order"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common_flags(*sub, flags);
    sub->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    specsel::cli::RunConfig cfg = build_config(flags);
    if (command == "synth") specsel::cli::cmd_synth(cfg, std::cout);
    else if (command == "rank") specsel::cli::cmd_rank(cfg, std::cout);
    else if (command == "train") specsel::cli::cmd_train(cfg, std::cout);
    else if (command == "eval") specsel::cli::cmd_eval(cfg, std::cout);
    else if (command == "bench") specsel::cli::cmd_bench(cfg, std::cout);
    else if (command == "plot") specsel::cli::cmd_plot(cfg, std::cout);
    else specsel::cli::cmd_pipeline(cfg, std::cout);
    return 0;
  } catch (const specsel::Error& e) {
    std::cerr << "error [" << specsel::to_string(e.kind()) << "] " << e.what() << "\n";
    return e.kind() == specsel::ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error [internal] " << e.what() << "\n";
    return 1;
  }
}
