#include "rtlevo/types.hpp"

#include <cmath>

#include "rtlevo/errors.hpp"

namespace rtlevo {

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::NoCode: return "no_code";
    case ParseErrorKind::EmptyCode: return "empty_code";
  }
  return "unknown";
}

std::string_view to_string(ProviderErrorKind kind) noexcept {
  switch (kind) {
    case ProviderErrorKind::Transient: return "transient";
    case ProviderErrorKind::Auth: return "auth";
    case ProviderErrorKind::Protocol: return "protocol";
  }
  return "unknown";
}

std::string_view to_string(ScriptErrorKind kind) noexcept {
  switch (kind) {
    case ScriptErrorKind::Unmatched: return "unmatched";
    case ScriptErrorKind::Exhausted: return "exhausted";
  }
  return "unknown";
}

std::string_view to_string(PromptStrategy s) noexcept {
  switch (s) {
    case PromptStrategy::Fix: return "Fix";
    case PromptStrategy::Simplify: return "Simplify";
    case PromptStrategy::Explore: return "Explore";
    case PromptStrategy::Refactor: return "Refactor";
    case PromptStrategy::Improve: return "Improve";
    case PromptStrategy::Fusion: return "Fusion";
  }
  return "unknown";
}

std::string_view to_string(PopulationLabel label) noexcept {
  return label == PopulationLabel::Fail ? "Fail" : "Success";
}

std::string_view to_string(CircuitKind kind) noexcept {
  return kind == CircuitKind::Combinational ? "combinational" : "sequential";
}

std::optional<PromptStrategy> strategy_from_string(std::string_view name) noexcept {
  for (auto s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<PopulationLabel> label_from_string(std::string_view name) noexcept {
  if (name == "Fail") return PopulationLabel::Fail;
  if (name == "Success") return PopulationLabel::Success;
  return std::nullopt;
}

std::optional<CircuitKind> circuit_kind_from_string(std::string_view name) noexcept {
  if (name == "combinational") return CircuitKind::Combinational;
  if (name == "sequential") return CircuitKind::Sequential;
  return std::nullopt;
}

void ProblemSpec::validate() const {
  if (functional_description.empty()) {
    throw ConfigError("problem.functional_description must be non-empty");
  }
  if (!(target_clock_period > 0.0) || !std::isfinite(target_clock_period)) {
    throw ConfigError("problem.target_clock_period must be > 0");
  }
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(reference_ppa.power)) throw ConfigError("problem.reference_ppa.power must be > 0");
  if (!positive(reference_ppa.area)) throw ConfigError("problem.reference_ppa.area must be > 0");
  if (!positive(reference_ppa.effective_clock_period)) {
    throw ConfigError("problem.reference_ppa.effective_clock_period must be > 0");
  }
}

PopulationLabel classify(const Individual& ind) {
  if (!ind.outcome) {
    throw UsageError("classify: individual " + std::to_string(ind.id) + " has not been evaluated");
  }
  return ind.outcome->sim_passed ? PopulationLabel::Success : PopulationLabel::Fail;
}

}  // namespace rtlevo
