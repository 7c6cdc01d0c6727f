#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlevo {

using IndividualId = std::uint64_t;

inline constexpr double kNegInfFitness = -std::numeric_limits<double>::infinity();

enum class PopulationLabel { Fail, Success };
enum class CircuitKind { Combinational, Sequential };

// The six evolutionary prompt operators. Fusion is the only binary one.
enum class PromptStrategy { Fix, Simplify, Explore, Refactor, Improve, Fusion };

inline constexpr std::array<PromptStrategy, 6> kAllStrategies = {
    PromptStrategy::Fix,      PromptStrategy::Simplify, PromptStrategy::Explore,
    PromptStrategy::Refactor, PromptStrategy::Improve,  PromptStrategy::Fusion};

constexpr int arity(PromptStrategy s) noexcept { return s == PromptStrategy::Fusion ? 2 : 1; }

std::string_view to_string(PromptStrategy s) noexcept;
std::string_view to_string(PopulationLabel label) noexcept;
std::string_view to_string(CircuitKind kind) noexcept;
std::optional<PromptStrategy> strategy_from_string(std::string_view name) noexcept;
std::optional<PopulationLabel> label_from_string(std::string_view name) noexcept;
std::optional<CircuitKind> circuit_kind_from_string(std::string_view name) noexcept;

struct PpaMetrics {
  double power = 0.0;
  double area = 0.0;
  // Nanoseconds.
  double effective_clock_period = 0.0;

  bool operator==(const PpaMetrics&) const = default;
};

struct EvalOutcome {
  bool sim_passed = false;
  // Only meaningful when sim_passed; synthesis is skipped for simulation failures.
  bool synth_succeeded = false;
  std::optional<PpaMetrics> ppa;
  std::string sim_log;
  std::string synth_log;
  // Set only when the gate-level re-simulation stage ran.
  std::optional<bool> post_synth_functional;

  bool operator==(const EvalOutcome&) const = default;
};

struct Lineage {
  std::vector<IndividualId> parents;
  std::optional<PromptStrategy> strategy;

  bool empty() const noexcept { return parents.empty() && !strategy; }
  bool operator==(const Lineage&) const = default;
};

struct Individual {
  IndividualId id = 0;
  std::string thought;
  std::string code;
  std::optional<std::string> feedback;
  std::optional<EvalOutcome> outcome;
  // Present iff outcome is present; -inf iff the design failed simulation.
  std::optional<double> fitness;
  Lineage lineage;
  int generation_born = 0;

  bool evaluated() const noexcept { return outcome.has_value(); }
  // -inf for unevaluated individuals, so they never outrank evaluated ones.
  double fitness_or_worst() const noexcept { return fitness.value_or(kNegInfFitness); }

  bool operator==(const Individual&) const = default;
};

struct ProblemSpec {
  std::string name;
  std::string functional_description;
  std::string testbench_source;
  PpaMetrics reference_ppa;
  CircuitKind circuit_kind = CircuitKind::Combinational;
  // Nanoseconds.
  double target_clock_period = 0.01;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Success iff the individual passed (pre-synthesis) simulation. Synthesis
// results never affect the label. Throws UsageError for unevaluated input.
PopulationLabel classify(const Individual& ind);

}  // namespace rtlevo
