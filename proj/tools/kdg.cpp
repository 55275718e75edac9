// kdg: command-line front end of the kinetic De Giorgi toolkit.

#include <CLI11.hpp>
#include <iostream>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "kdg/error.hpp"
#include "kdg/report.hpp"

int main(int argc, char** argv) {
  using namespace kdg::app;
  CLI::App app{"Numerical checks for the De Giorgi/Harnack theory of kinetic integro-differential equations"};
  app.footer(describe_keys());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string surrogate_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int refine = 0;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed of the quasi-random streams");
  app.add_option("--surrogate-constants", surrogate_path, "INI file with a [surrogate] section")
      ->check(CLI::ExistingFile);
  app.add_option("--refine", refine, "grid-doubling ladder depth");

  std::string chosen;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, "run " + name);
    sub->callback([&chosen, name] { chosen = name; });
  }
  auto* rt = app.add_subcommand("roundtrip", "canonicalize a report file in place");
  std::string report_path;
  rt->add_option("report", report_path, "report JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (rt->parsed()) {
      const std::string text = kdg::report_roundtrip(report_path);
      kdg::write_report(report_path, kdg::parse_report(text));
      return kExitOk;
    }
    RunConfig cfg;
    if (!config_path.empty()) cfg.merge_file(config_path);
    if (!surrogate_path.empty()) cfg.merge_file(surrogate_path, true);
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    cfg.refine = refine;
    return run_subcommand(chosen, cfg, std::cerr);
  } catch (const kdg::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
