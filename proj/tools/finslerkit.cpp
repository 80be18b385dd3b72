#include "finslerkit/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"finslerkit: smoothing, Sobolev and quotient experiments on Finsler manifolds"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"validate-norm", "check the Minkowski norm axioms"},
      {"smooth", "smooth a Lipschitz function and audit the bounds"},
      {"check-hilbert", "parallelogram test of upper-gradient surrogates"},
      {"quotient", "quotient norms, minimal lifts and the adjoint embedding"},
      {"distance", "graph geodesic distances between sample pairs"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "override the configured seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : finslerkit::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--out")) out_dir = out;
  if (sub->count("--seed")) seed_override = seed;
  return finslerkit::run_command(command, config, out_dir, seed_override, std::cerr);
}
