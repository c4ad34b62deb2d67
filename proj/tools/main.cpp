#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tfe/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Thin-film equation simulator and diagnostics"};
  app.set_version_flag("--version", std::string(tfe::kToolVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<int> workers;
  std::uint64_t seed = 1;

  const std::pair<const char*, const char*> commands[] = {
      {"run", "Evolve the initial data and write the time series"},
      {"criteria", "Evaluate the growth criteria on the initial data"},
      {"diagnose", "Run with waiting-time, monotonicity, cascade and energy monitors"},
      {"sweep", "Run the configured study"},
      {"validate", "Run the configured study and check its acceptance properties"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config or manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--workers", workers, "Parallel runs in a study")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Seed for randomized corpus checks");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tfe::kExitConfigError;
  }

  const auto command = tfe::parse_command(app.get_subcommands().front()->get_name());
  tfe::ExecuteOptions options;
  options.workers = workers;
  options.seed = seed;
  const int code = tfe::execute_file(*command, config, out, options);
  if (code != tfe::kExitOk) std::cerr << "tfe: failed with exit code " << code << "; see " << out << "/errors.json\n";
  return code;
}
