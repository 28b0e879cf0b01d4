#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ergconc/ergconc.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

// Domain failures during a run come from configured values.
int exit_code(ergconc_status status) {
  return status == ERGCONC_ERR_DOMAIN ? ERGCONC_ERR_CONFIG : static_cast<int>(status);
}

int fail(ergconc_status status) {
  std::cerr << "ergconc: " << ergconc_last_error() << '\n';
  return exit_code(status);
}

std::optional<int> threads_from_env() {
  const char* env = std::getenv("ERGCONC_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (*end != '\0' || value < 0 || value > 4096) {
    std::cerr << "ergconc: ignoring invalid ERGCONC_THREADS='" << env << "'\n";
    return std::nullopt;
  }
  return static_cast<int>(value);
}

int run(const Options& options, ergconc_command command) {
  ergconc_config* config = nullptr;
  ergconc_status status = ergconc_config_load(options.config.c_str(), &config);
  if (status != ERGCONC_OK) return fail(status);
  if (options.seed) ergconc_config_set_seed(config, *options.seed);
  const std::optional<int> threads = options.threads ? options.threads : threads_from_env();
  status = ergconc_run_command(config, command, options.out.empty() ? nullptr : options.out.c_str(),
                               threads.value_or(-1));
  ergconc_config_free(config);
  std::cout.flush();
  if (status != ERGCONC_OK) return fail(status);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decreasing-step Euler scheme: ergodic averages, Monte Carlo deviations and concentration bounds"};
  app.set_version_flag("--version", std::string(ergconc_version()));
  app.require_subcommand(1);

  Options options;
  struct Entry {
    const char* name;
    const char* help;
    ergconc_command command;
  };
  const Entry entries[] = {
      {"check", "confluence constant, [theta]_1 bound, step-exponent verdict, innovation moments", ERGCONC_CMD_CHECK},
      {"carre", "ergodic estimates of nu(|sigma^* grad phi|^2) and nu(||sigma||^2)", ERGCONC_CMD_CARRE},
      {"deviations", "Monte Carlo deviation curve (CSV)", ERGCONC_CMD_DEVIATIONS},
      {"bounds", "concentration bound curves (CSV)", ERGCONC_CMD_BOUNDS},
      {"figure", "deviation/bound overlay (SVG and joined CSV)", ERGCONC_CMD_FIGURE},
      {"simulate", "trajectory trace of one path (CSV)", ERGCONC_CMD_SIMULATE},
  };
  ergconc_command selected = ERGCONC_CMD_CHECK;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", options.config, "experiment JSON")->required();
    sub->add_option("--out", options.out, "output path (default: configured path or stdout)");
    sub->add_option("--seed", options.seed, "master seed");
    sub->add_option("--threads", options.threads, "worker threads, 0 = auto (fallback: ERGCONC_THREADS)")
        ->check(CLI::Range(0, 4096));
    const ergconc_command command = e.command;
    sub->callback([&selected, command] { selected = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ERGCONC_ERR_CONFIG;
  }
  return run(options, selected);
}
