#pragma once

#include <cstdint>
#include <string>

#include "rtlevo/llm.hpp"

namespace rtlevo {

// Outcome probabilities and PPA drift for the simulated designer. Metrics
// are multiplicative factors on the parent's (or, for fresh designs, the
// reference's) PPA, drawn uniformly from [low, high].
struct SimulatedDesignerConfig {
  double initial_fail_probability = 0.7;
  // Probability that Fix turns a failing parent into a passing design.
  double fix_success_probability = 0.5;
  // Same, for the other operators applied to a failing parent.
  double repair_probability = 0.1;
  // Probability that an operator applied to a passing parent stays correct.
  double keep_correct_probability = 0.9;
  double synth_fail_probability = 0.0;

  PpaMetrics reference{1.0, 1.0, 1.0};
  double fresh_low = 0.8, fresh_high = 1.4;
  double improve_low = 0.85, improve_high = 1.05;
  double simplify_low = 0.8, simplify_high = 1.1;
  double refactor_low = 0.9, refactor_high = 1.1;
  double fusion_low = 0.9, fusion_high = 1.05;

  std::uint64_t seed = 0;

  void validate() const;
};

// Stochastic scripted provider. It reads parent verdicts and PPA from the
// annotations of the parent code embedded in the prompt and answers with an
// annotated design (see SyntheticEvaluator). Each response is a pure function
// of (seed, bundle.stream_seed, prompt), so call order never matters.
class SimulatedDesigner final : public LlmProvider {
 public:
  explicit SimulatedDesigner(SimulatedDesignerConfig cfg);

  CompletionResult complete(const PromptBundle& bundle) override;
  std::string describe() const override { return "simulated"; }

  const SimulatedDesignerConfig& config() const noexcept { return cfg_; }

 private:
  SimulatedDesignerConfig cfg_;
};

}  // namespace rtlevo
