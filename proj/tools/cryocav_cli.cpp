// Command-line front end. Talks to the library only through the C API.
#include "cryocav/cryocav.h"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Cryogenic cavity vibration and polariton toolkit", "cryocav"};
  app.set_version_flag("--version", std::string(cryocav_version()));

  std::string command, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  unsigned parallel = 1;
  app.add_option("command", command, "synth | convert | lock | analyze | fit-finesse | fit-polariton | report");
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override the [run] seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--parallel", parallel, "worker threads for Monte-Carlo commands")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "error: usage: " << e.what() << "\n";
    return 1;
  }
  if (command.empty()) {
    std::cerr << cryocav_usage() << "error: usage: no command given\n";
    return 1;
  }

  cryocav_config* config = nullptr;
  const cryocav_status st = config_path.empty() ? cryocav_config_default(&config)
                                                : cryocav_config_load(config_path.c_str(), &config);
  if (st != CRYOCAV_OK) {
    std::cerr << "error: " << (st == CRYOCAV_ERR_IO ? "io" : "validation") << ": " << cryocav_last_error() << "\n";
    return 1;
  }

  const std::string base_dir =
      config_path.empty() ? std::string(".") : std::filesystem::path(config_path).parent_path().string();
  cryocav_run_options options{out_dir.c_str(), base_dir.empty() ? "." : base_dir.c_str(), seed_opt->count() > 0, seed,
                              parallel};
  cryocav_run_result result{};
  const cryocav_status run_status = cryocav_run(command.c_str(), config, &options, &result);
  cryocav_config_free(config);
  if (run_status != CRYOCAV_OK) {
    std::cerr << "error: internal: " << cryocav_last_error() << "\n";
    return 1;
  }

  if (result.exit_code == 0) {
    std::cout << result.summary;
  } else {
    if (result.summary && *result.summary) std::cerr << result.summary;
    std::cerr << result.error << "\n";
  }
  const int code = result.exit_code;
  cryocav_string_free(result.summary);
  cryocav_string_free(result.error);
  return code;
}
