// catmem: run, sweep, oracle and validate commands for the cat-state memory simulator.

#include "catmem/acceptance.hpp"
#include "catmem/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  std::string preset;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir;
  std::vector<std::string> set;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--preset", f.preset, "Named preset applied first")
      ->check(CLI::IsMember(catmem::preset_names()));
  cmd->add_option("--config", f.config_path, "key = value config file applied after the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", f.set, "Extra key=value overrides applied after the config file");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_flag("--dry-run", f.dry_run, "Print the resolved configuration and exit");
}

catmem::ExperimentConfig resolve(const CommonFlags& f) {
  catmem::ExperimentConfig config = f.preset.empty() ? catmem::ExperimentConfig{} : catmem::preset_config(f.preset);
  if (!f.config_path.empty()) catmem::apply_config_file(config, f.config_path);
  for (const auto& kv : f.set) catmem::apply_config_text(config, kv, "--set");
  if (f.seed) config.seed = *f.seed;
  if (f.workers) config.workers = *f.workers;
  if (!f.out_dir.empty()) config.out_dir = f.out_dir;
  config.validate();
  return config;
}

int print_plan(const catmem::ExperimentConfig& config) {
  std::cout << "# config_hash=" << catmem::hex64(config.hash()) << '\n' << config.canonical();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P simulation of an optomechanical cat-state memory"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "Simulate one parameter point and write its signatures");
  add_common(run, run_flags);
  auto* sweep = app.add_subcommand("sweep", "Simulate a parameter grid with per-point checkpoints");
  add_common(sweep, sweep_flags);

  std::string query;
  std::vector<std::string> oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Evaluate a closed-form result and print it as JSON");
  oracle->add_option("query", query, "Quantity to evaluate")->required()->check(CLI::IsMember(catmem::oracle_queries()));
  oracle->add_option("args", oracle_args, "key=value arguments");

  catmem::AcceptanceOptions acceptance;
  auto* validate = app.add_subcommand("validate", "Run the acceptance criteria");
  validate->add_flag("--dry-run", acceptance.dry_run, "List the criteria without running them");
  validate->add_option("--only", acceptance.only, "Criterion ids to run")->check(CLI::Range(1, 9));
  validate->add_option("--workers", acceptance.workers, "Worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--out", acceptance.json_path, "Write a JSON report to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = resolve(run_flags);
      return run_flags.dry_run ? print_plan(config) : catmem::cmd_run(config, std::cout);
    }
    if (*sweep) {
      const auto config = resolve(sweep_flags);
      return sweep_flags.dry_run ? print_plan(config) : catmem::cmd_sweep(config, std::cout);
    }
    if (*oracle) return catmem::cmd_oracle(query, oracle_args, std::cout);
    if (*validate) return catmem::cmd_validate(acceptance, std::cout);
  } catch (const catmem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const catmem::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const catmem::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
