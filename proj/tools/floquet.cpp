#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "floquet/errors.hpp"
#include "floquet/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Principal Lyapunov exponents, Floquet vectors and exponential separation of positive random cocycles"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  floquet::RunOverrides overrides;
  int workers = -1;
  std::int64_t horizon = -1;

  const std::pair<const char*, const char*> commands[] = {
      {"estimate", "top exponent by pullback and Birkhoff averaging"},
      {"separation", "w, w*, second exponent and separation rate"},
      {"verify", "check the standing assumptions on a model"},
      {"compare", "coupled comparison of model against model_hi"},
      {"orbit", "entire positive orbit around an anchor"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: $FLOQUET_OUT_DIR or ./floquet_out)");
    sub->add_option("--workers", workers, "worker threads (0 = machine parallelism)")->check(CLI::NonNegativeNumber);
    sub->add_option("--horizon", horizon, "override the horizon N")->check(CLI::Range(std::int64_t{2}, INT64_MAX));
    sub->add_option("--dump-matrices", overrides.dump_matrices, "write this many samples of the first seed to matrices.csv")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : floquet::exit_config;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("FLOQUET_OUT_DIR");
    out_dir = env && *env ? env : "floquet_out";
  }
  if (workers >= 0) overrides.workers = workers;
  if (horizon > 0) overrides.horizon = horizon;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = floquet::load_config(config_path);
    const auto outcome = floquet::run_command(command, config, out_dir, overrides);
    const auto& record = outcome.record;
    std::cout << command << ": " << record.at("status").get<std::string>();
    if (!record.at("error").is_null()) std::cout << " (" << record.at("error").at("message").get<std::string>() << ")";
    std::cout << "\n";
    for (const auto& f : outcome.files) std::cout << "  wrote " << f.string() << "\n";
    return outcome.exit_code;
  } catch (const floquet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return floquet::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return floquet::exit_numerical;
  }
}
