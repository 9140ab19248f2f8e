#include "peri/app/config.hpp"
#include "peri/app/runner.hpp"
#include "peri/app/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace peri;
using namespace peri::app;

namespace {

int report(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << '\n';
  return errors.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal peridynamic wave equation on a periodic 1D grid"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a configuration or a named scenario");
  std::string config_path, scenario, out_dir;
  std::vector<std::string> sets;
  auto* cfg_opt = run_cmd->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* scen_opt = run_cmd->add_option("--scenario", scenario, "named scenario preset");
  cfg_opt->excludes(scen_opt);
  run_cmd->add_option("--set", sets, "override a key, e.g. --set solver.T_end=2")->take_all();
  run_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");

  auto* list_cmd = app.add_subcommand("list-scenarios", "print scenario names and descriptions");

  auto* val_cmd = app.add_subcommand("validate", "check a configuration without running it");
  std::string val_path;
  val_cmd->add_option("--config", val_path, "JSON configuration file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& s : scenarios())
        if (s.listed) std::cout << s.name << "  " << s.description << '\n';
      return 0;
    }
    if (*val_cmd) {
      const json doc = resolve(std::nullopt, load_document(val_path), {});
      const auto errors = validate(doc);
      if (errors.empty()) std::cout << "ok\n";
      return report(errors);
    }
    if (!*cfg_opt && !*scen_opt) {
      std::cerr << "error: run needs --config FILE or --scenario NAME\n";
      return 2;
    }
    const json user = *cfg_opt ? load_document(config_path) : json();
    const json doc = resolve(*scen_opt ? std::optional<std::string>(scenario) : std::nullopt, user, sets);
    if (int rc = report(validate(doc))) return rc;
    const SimConfig cfg = parse(doc);
    const json summary = run(cfg, out_dir.empty() ? cfg.out_dir : out_dir);
    std::cout << "status " << summary["status"].get<std::string>();
    if (!summary["t_exit"].is_null()) std::cout << "  t_exit " << format_number(summary["t_exit"].get<double>());
    if (!summary["t1_bound"].is_null()) std::cout << "  t1_bound " << format_number(summary["t1_bound"].get<double>());
    if (summary.contains("drift")) std::cout << "  drift " << format_number(summary["drift"].get<double>());
    std::cout << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
