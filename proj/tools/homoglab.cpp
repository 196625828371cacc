#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "homog/csv.hpp"
#include "homog/runner.hpp"

namespace {

int exit_code(homog::ErrorCode code) {
  switch (code) {
    case homog::ErrorCode::ParseError:
    case homog::ErrorCode::ValidationError:
      return 2;
    case homog::ErrorCode::MaxIterExceeded:
      return 4;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homoglab: lattice stochastic homogenization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  long long seed_override = -1;
  int threads_override = 0;

  const std::vector<std::string> commands = {"correctors", "growth", "excess",
                                             "thmT",       "corC",   "lemmaL"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "path to the key=value config file")
        ->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override");
    sub->add_option("--threads", threads_override, "worker thread count override");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    homog::ExperimentConfig cfg =
        homog::parse_config(homog::read_file(config_path));
    if (homog::to_string(cfg.command) != command)
      throw homog::Error(homog::ErrorCode::ValidationError,
                         "field command: config says '" +
                             std::string(homog::to_string(cfg.command)) +
                             "' but the CLI invoked '" + command + "'");
    if (!out_override.empty()) cfg.out = out_override;
    if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
    if (threads_override > 0) {
      cfg.threads = threads_override;
    } else if (const char* env = std::getenv("HOMOGLAB_THREADS")) {
      const int t = std::atoi(env);
      if (t > 0) cfg.threads = t;
    }

    const homog::RunManifest manifest = homog::run(cfg);
    std::cout << manifest.text();
    if (!manifest.all_passed) {
      std::cerr << "stage " << command << ": certification failed\n";
      return 4;
    }
    return 0;
  } catch (const homog::Error& e) {
    std::cerr << "stage " << command << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "stage " << command << ": " << e.what() << "\n";
    return 4;
  }
}
