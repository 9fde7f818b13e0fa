#include <CLI11.hpp>

#include <iostream>

#include "furst/error.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  using namespace furst::app;
  CLI::App app{"Furstenberg correspondence experiments: densities, cylinder measures, spectra, moments"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "furst-out";
  bool no_cache = false;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  app.add_option("--config", config_path, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--no-cache", no_cache, "recompute every task");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  const std::pair<const char*, const char*> commands[] = {
      {"run", "run every task in the config"},
      {"density", "density tables and upper-density estimates"},
      {"spectrum", "correlation spectrum export (CSV)"},
      {"cylinders", "empirical cylinder measures"},
      {"verify", "correspondence check against an exact oracle system"},
      {"compare", "spectrum comparison of two sets"},
      {"moments", "weighted moments and accordance"},
      {"normcheck", "averaging-scheme normalization"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunOptions opt;
  opt.out_dir = out_dir;
  opt.use_cache = !no_cache;
  opt.threads = threads;
  opt.format = format == "csv" ? ReportFormat::csv : ReportFormat::json;
  const std::string command = app.get_subcommands().front()->get_name();
  if (command != "run") opt.only_kind = command;

  try {
    const ExperimentConfig cfg = load_config(config_path, seed);
    return run(cfg, opt).exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const furst::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == furst::ErrorKind::cap_exceeded ? 3 : 2;
  }
}
