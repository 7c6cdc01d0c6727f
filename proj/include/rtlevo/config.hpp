#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rtlevo/evaluation.hpp"
#include "rtlevo/evolution.hpp"
#include "rtlevo/http_provider.hpp"
#include "rtlevo/simulated_provider.hpp"

namespace rtlevo {

enum class ProviderKind { Http, Scripted, Simulated };
enum class EvaluatorKind { Toolchain, Synthetic };

std::string_view to_string(ProviderKind k) noexcept;
std::string_view to_string(EvaluatorKind k) noexcept;

// Everything one `run` needs. Relative paths in the file are resolved against
// the directory holding the config file.
struct RunConfig {
  std::filesystem::path config_path;

  ProblemSpec problem;
  // Set when the reference PPA must be measured from a design file before
  // generation 0; problem.reference_ppa is then filled in by the runner.
  std::optional<std::filesystem::path> reference_design;

  EvolutionConfig evolution;

  ProviderKind provider_kind = ProviderKind::Http;
  ProviderConfig http;
  std::filesystem::path script_path;
  SimulatedDesignerConfig simulated;

  EvaluatorKind evaluator_kind = EvaluatorKind::Toolchain;
  ToolchainConfig toolchain;
  SyntheticEvaluatorConfig synthetic;

  std::optional<std::filesystem::path> template_dir;
  bool include_testbench = false;
  FeedbackSettings feedback;

  std::filesystem::path output_dir = "runs/latest";
  bool keep_artifacts = false;

  // Whether the file set these explicitly; otherwise they follow
  // evolution.rng_seed and problem.reference_ppa.
  bool simulated_seed_explicit = false;
  bool synthetic_seed_explicit = false;
  bool simulated_reference_explicit = false;

  // Sets evolution.rng_seed and every seed that follows it.
  void set_seed(std::uint64_t seed);
  // Sets problem.reference_ppa and every reference that follows it.
  void set_reference_ppa(const PpaMetrics& ref);

  // Throws ConfigError naming the field and its bound.
  void validate() const;
};

// Parses and validates a JSON config. Omitted hyperparameters take their
// defaults; weights default from problem.circuit_kind. Unknown keys are
// collected and reported together in one ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Fully expanded config, defaults included, with every path made absolute.
// Contains no secrets: the API key is only ever referenced by variable name.
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace rtlevo
