#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>

#include "rtlevo/config.hpp"

namespace rtlevo {

// Command-line overrides applied on top of a loaded config.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  bool keep_artifacts = false;
  std::optional<int> generations;
};

void apply_overrides(RunConfig& cfg, const RunOverrides& o);

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& cfg);
// Reads the API key from the environment for the http provider.
std::unique_ptr<LlmProvider> make_provider(const RunConfig& cfg);
PromptLibrary make_prompts(const RunConfig& cfg);

enum ExitStatus : int { kExitFound = 0, kExitAbort = 1, kExitNotFound = 2 };

// Runs the evolution and writes the run directory:
//   config.json        expanded config, no secrets
//   run.json           status, wall clock, reference PPA
//   generations.jsonl  one GenerationRecord per line
//   transcripts.jsonl  every provider call
//   report.json        best individual and summary tables
//   artifacts/         per-individual files when keep_artifacts is set
// Progress and errors go to `log`. Returns an ExitStatus.
int cmd_run(RunConfig cfg, std::ostream& log);

// Builds the generation-0 prompts without calling any provider, writes them
// to dry_run_prompts.jsonl in the output directory and prints them.
int cmd_dry_run(RunConfig cfg, std::ostream& out);

// Synthesizes `design` once with the configured evaluator. Throws Error when
// the design does not synthesize.
PpaMetrics cmd_ref_ppa(const std::filesystem::path& design, const RunConfig& cfg);

}  // namespace rtlevo
