#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "rtlevo/fitness.hpp"
#include "rtlevo/llm.hpp"
#include "rtlevo/prompts.hpp"
#include "rtlevo/types.hpp"

namespace rtlevo {

// Runs simulation and synthesis for one piece of RTL. Implementations absorb
// every per-design failure into the returned outcome and throw only
// EnvironmentError, which aborts the run.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // `scratch` is an existing, empty directory owned by this call.
  virtual EvalOutcome assess(const std::string& code, const ProblemSpec& spec,
                             const std::filesystem::path& scratch) const = 0;

  // PPA of a reference design. Throws Error when it does not synthesize.
  virtual PpaMetrics reference_ppa(const std::string& code, const ProblemSpec& spec,
                                   const std::filesystem::path& scratch) const = 0;

  // Environment checks run once before generation 0.
  virtual void precheck() const {}

  virtual std::string describe() const = 0;
};

// ---------------------------------------------------------------------------
// External tools

struct ToolchainConfig {
  // Compile step; {code_file} {testbench_file} {sim_bin} {workdir}.
  std::string simulator_command = "iverilog -g2012 -o {sim_bin} {code_file} {testbench_file}";
  // Run step; its output is searched for sim_pass_pattern.
  std::string sim_run_command = "vvp -n {sim_bin}";
  // Case-insensitive ECMAScript regex. Passing needs a match AND exit status 0.
  std::string sim_pass_pattern =
      R"(all tests passed|your design passed|mismatches:\s*0\s+in\s+\d+\s+samples)";

  // {script_file} is the rendered synth_script; the script may use {code_file}
  // {liberty} {clock_ns} {clock_ps} {out_report} {netlist_file} {top}.
  std::string synthesizer_command = "yosys -q -s {script_file}";
  std::string synth_script = default_synth_script();
  // Optional static timing / power step ({sta_script_file}); empty disables it.
  std::string sta_command = "sta -no_splash -exit {sta_script_file}";
  std::string sta_script = default_sta_script();

  std::filesystem::path liberty_path;
  // Nanoseconds.
  double clock_period = 0.01;
  double per_stage_timeout_s = 300.0;
  // Empty selects a fresh directory under the system temp directory.
  std::filesystem::path workdir_root;
  // Top module name; empty infers it from the code.
  std::string top_module;

  // Gate-level re-simulation of the synthesized netlist. Off by default; it
  // only ever sets post_synth_functional.
  bool post_synth_check = false;
  std::string post_synth_sim_command =
      "iverilog -g2012 -o {gl_bin} {netlist_file} {testbench_file} {cell_models}";
  std::string post_synth_run_command = "vvp -n {gl_bin}";
  std::filesystem::path cell_models;

  void validate() const;

  static std::string default_synth_script();
  static std::string default_sta_script();
};

// Extracts total cell area, total power, and worst slack; the effective
// period is clock_period - worst_slack. Throws ReportError naming the field
// that is missing or invalid ("area", "power", "slack").
PpaMetrics parse_ppa_report(std::string_view raw, double clock_period);

// Best-effort top-level module name: the first declared module that no other
// module instantiates.
std::string infer_top_module(std::string_view code);

struct SimulationResult {
  bool passed = false;
  std::string log;
};

struct SynthesisResult {
  std::string report;
  bool succeeded = false;
  std::string log;
};

class ToolchainEvaluator final : public Evaluator {
 public:
  explicit ToolchainEvaluator(ToolchainConfig cfg);

  SimulationResult simulate(const std::string& code, const ProblemSpec& spec,
                            const std::filesystem::path& scratch) const;
  SynthesisResult synthesize(const std::string& code, const std::filesystem::path& scratch) const;

  EvalOutcome assess(const std::string& code, const ProblemSpec& spec,
                     const std::filesystem::path& scratch) const override;
  PpaMetrics reference_ppa(const std::string& code, const ProblemSpec& spec,
                           const std::filesystem::path& scratch) const override;
  // Executables resolvable and the liberty file readable.
  void precheck() const override;
  std::string describe() const override { return "toolchain"; }

  const ToolchainConfig& config() const noexcept { return cfg_; }

 private:
  std::map<std::string, std::string> placeholders(const std::string& code,
                                                  const std::filesystem::path& scratch) const;
  // Gate-level re-simulation reusing the testbench written by simulate().
  std::optional<bool> post_synth_check(const std::string& code,
                                       const std::filesystem::path& scratch,
                                       std::string& log) const;

  ToolchainConfig cfg_;
};

// ---------------------------------------------------------------------------
// Tool-free evaluator driven by annotations in the code text:
//
//   // @sim: pass            (or fail; absent means fail)
//   // @synth: fail          (optional; synthesis succeeds otherwise)
//   // @ppa power=1.5 area=40 period=0.5
//   // @postsynth: fail      (optional; only read when post_synth_check is on)
//
// Under the hash rules the verdict and metrics are derived from a hash of the
// code and the seed instead.

struct SyntheticEvaluatorConfig {
  enum class PassRule { Annotation, Always, Never, Hash };
  enum class PpaRule { Annotation, Hash };

  PassRule pass_rule = PassRule::Annotation;
  double pass_probability = 0.5;  // Hash rule
  // Annotation falls back to Hash when a design carries no @ppa line.
  PpaRule ppa_rule = PpaRule::Annotation;
  PpaMetrics hash_base{1.0, 1.0, 1.0};
  double hash_spread = 0.3;  // metrics within base * [1 - spread, 1 + spread]
  std::uint64_t seed = 0;
  bool post_synth_check = false;
  // Sleep per assessment, for exercising concurrency.
  int simulated_latency_ms = 0;

  void validate() const;
};

class SyntheticEvaluator final : public Evaluator {
 public:
  explicit SyntheticEvaluator(SyntheticEvaluatorConfig cfg);

  bool passes(const std::string& code) const;
  std::optional<PpaMetrics> ppa(const std::string& code) const;

  EvalOutcome assess(const std::string& code, const ProblemSpec& spec,
                     const std::filesystem::path& scratch) const override;
  PpaMetrics reference_ppa(const std::string& code, const ProblemSpec& spec,
                           const std::filesystem::path& scratch) const override;
  std::string describe() const override { return "synthetic"; }

  const SyntheticEvaluatorConfig& config() const noexcept { return cfg_; }

 private:
  SyntheticEvaluatorConfig cfg_;
};

// Annotation helpers shared with the simulated LLM provider.
std::string ppa_annotation(const PpaMetrics& m);
std::optional<PpaMetrics> read_ppa_annotation(std::string_view code);

// ---------------------------------------------------------------------------
// Composition

struct EvalContext {
  const ProblemSpec& spec;
  FitnessWeights weights;
  const Evaluator& evaluator;
  LlmProvider& provider;
  const PromptLibrary& prompts;
  std::filesystem::path scratch_root;
  // Per-individual directories (code, logs, feedback) survive when set;
  // otherwise each scratch directory is removed after evaluation.
  bool keep_artifacts = false;
  std::uint64_t seed = 0;
};

// Deterministic feedback used when the provider fails. Never empty.
std::string fallback_feedback(const Individual& ind, const ProblemSpec& spec);

// Asks the provider to analyze the simulation log (Fail) or the PPA against
// the reference (Success). Provider errors yield fallback_feedback.
std::string generate_feedback(const Individual& ind, const ProblemSpec& spec,
                              LlmProvider& provider, const PromptLibrary& prompts,
                              std::uint64_t stream_seed = 0);

// simulate -> synthesize -> parse -> fitness -> feedback.
Individual evaluate(Individual ind, const EvalContext& ctx);

// An individual whose model response had no usable code: treated exactly like
// a simulation failure, with feedback still generated.
Individual evaluate_unparseable(Individual ind, const std::string& reason, const EvalContext& ctx);

}  // namespace rtlevo
