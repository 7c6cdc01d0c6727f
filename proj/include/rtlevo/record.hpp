#pragma once

#include <string>
#include <vector>

#include "rtlevo/bandit.hpp"
#include "rtlevo/types.hpp"

namespace rtlevo {

// One bandit pull attributed after a generation's batch was evaluated.
struct StrategyEvent {
  PopulationLabel label = PopulationLabel::Fail;
  PromptStrategy strategy = PromptStrategy::Fix;
  double reward = 0.0;
  IndividualId offspring = 0;

  bool operator==(const StrategyEvent&) const = default;
};

// Immutable snapshot of one generation.
struct GenerationRecord {
  int generation_index = 0;
  // The population after survivor selection (generation 0: the initial one).
  std::vector<Individual> population;
  std::vector<Individual> offspring;
  std::vector<StrategyEvent> strategy_events;
  // All-time best over generations <= generation_index.
  IndividualId best_so_far = 0;
  double best_fitness = kNegInfFitness;
  int fail_count = 0;
  int success_count = 0;
  // Offspring quota used to produce `offspring`; zero for generation 0.
  int quota_fail = 0;
  int quota_success = 0;
  // Bandit state after this generation's rewards.
  BanditSnapshot fail_bandit;
  BanditSnapshot success_bandit;
  // Operational notes (strategy resamples and similar).
  std::vector<std::string> notes;
};

}  // namespace rtlevo
