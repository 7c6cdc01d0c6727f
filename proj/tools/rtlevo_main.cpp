#include <iostream>

#include "CLI11.hpp"
#include "rtlevo/config.hpp"
#include "rtlevo/errors.hpp"
#include "rtlevo/json_io.hpp"
#include "rtlevo/report.hpp"
#include "rtlevo/run.hpp"

namespace {

rtlevo::RunConfig configured(const std::string& path, const rtlevo::RunOverrides& overrides) {
  auto cfg = rtlevo::load_config(path);
  rtlevo::apply_overrides(cfg, overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve RTL designs with an LLM, a simulator and a synthesizer"};
  app.require_subcommand(1);

  std::string config_path;
  rtlevo::RunOverrides overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  int generations = 0;
  bool dry_run = false;

  auto* run = app.add_subcommand("run", "Run the evolution for one problem");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Override evolution.rng_seed");
  auto* out_opt = run->add_option("--out", out_dir, "Override output_dir");
  run->add_flag("--keep-artifacts", overrides.keep_artifacts, "Keep per-individual files");
  auto* gen_opt = run->add_option("--generations", generations, "Override evolution.max_generations")
                      ->check(CLI::PositiveNumber);
  run->add_flag("--dry-run", dry_run, "Build the generation-0 prompts without calling the provider");

  std::string run_dir;
  bool report_as_json = false;
  auto* report = app.add_subcommand("report", "Summarize a finished run directory");
  report->add_option("run_dir", run_dir, "Run directory")->required();
  report->add_flag("--json", report_as_json, "Print the summary as JSON");

  std::string design_path;
  auto* ref = app.add_subcommand("ref-ppa", "Measure the PPA of a reference design");
  ref->add_option("design", design_path, "Reference RTL file")->required()->check(CLI::ExistingFile);
  ref->add_option("--config", config_path, "Run configuration selecting the evaluator")
      ->required()
      ->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate-config", "Check a config and print it expanded");
  validate->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (*seed_opt) overrides.seed = seed;
      if (*out_opt) overrides.output_dir = out_dir;
      if (*gen_opt) overrides.generations = generations;
      auto cfg = configured(config_path, overrides);
      return dry_run ? rtlevo::cmd_dry_run(std::move(cfg), std::cout)
                     : rtlevo::cmd_run(std::move(cfg), std::cerr);
    }
    if (report->parsed()) {
      const auto data = rtlevo::load_run(run_dir);
      const auto text = report_as_json ? rtlevo::report_json(data).dump(2) + "\n"
                                       : rtlevo::render_report(data);
      std::cout << text;
      return 0;
    }
    if (ref->parsed()) {
      const auto cfg = rtlevo::load_config(config_path);
      std::cout << nlohmann::json(rtlevo::cmd_ref_ppa(design_path, cfg)).dump(2) << "\n";
      return 0;
    }
    if (validate->parsed()) {
      const auto cfg = rtlevo::load_config(config_path);
      std::cout << rtlevo::config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rtlevo::kExitAbort;
  }
  return rtlevo::kExitAbort;
}
