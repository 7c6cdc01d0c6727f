#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "rtlevo/bandit.hpp"
#include "rtlevo/batch.hpp"
#include "rtlevo/evaluation.hpp"
#include "rtlevo/fitness.hpp"
#include "rtlevo/record.hpp"

namespace rtlevo {

struct EvolutionConfig {
  int population_size = 10;    // N
  int offspring_count = 10;    // lambda
  int max_generations = 20;    // G
  int elite_per_metric = 1;    // n
  FitnessWeights weights;
  double reward = 1.0;         // R
  double exploration_c = 2.0;  // c
  double temperature = 1.0;    // tau
  std::uint64_t rng_seed = 0;

  ExecutionMode execution = ExecutionMode::Parallel;
  int max_threads = 0;

  // Throws ConfigError naming the field and bound.
  void validate() const;
};

struct OffspringQuota {
  int fail = 0;
  int success = 0;

  bool operator==(const OffspringQuota&) const = default;
};

// Proportional split of lambda by largest remainder, Fail first on ties.
OffspringQuota offspring_quota(int fail_count, int success_count, int lambda);

// Total order used for ranking: higher fitness, then younger generation, then
// lower id.
bool ranks_before(const Individual& a, const Individual& b) noexcept;

// Roulette weights over a Success sub-population: fitness - min + 1e-6, or
// all ones when every fitness is equal.
std::vector<double> roulette_weights(std::span<const Individual> subpop);

// Indices into `subpop`. Fail: uniform draws. Success: roulette draws; the
// two Fusion parents are distinct. Throws UsageError when `subpop` is too
// small for the strategy's arity.
std::vector<std::size_t> select_parents(std::span<const Individual> subpop, PopulationLabel label,
                                        PromptStrategy strategy, Rng& rng);

// Next population of cfg.population_size individuals: the best
// cfg.elite_per_metric synthesized Success parents per metric (deduplicated),
// then the best-ranked of parents and offspring.
std::vector<Individual> survivor_select(std::span<const Individual> parents,
                                        std::span<const Individual> offspring,
                                        const EvolutionConfig& cfg);

// Fail parents: R when the offspring passes simulation. Success parents: R
// when the offspring's fitness beats the best parent's. 0 otherwise.
double offspring_reward(PopulationLabel label, const Individual& offspring,
                        std::span<const Individual> parents, double reward);

struct RunResult {
  Individual best;
  bool found_correct = false;
  std::vector<GenerationRecord> history;
};

struct ScratchSettings {
  std::filesystem::path root;
  bool keep_artifacts = false;
};

// The dual-population loop. One instance runs one problem.
class EvolutionEngine {
 public:
  EvolutionEngine(const ProblemSpec& spec, EvolutionConfig cfg, LlmProvider& provider,
                  const Evaluator& evaluator, const PromptLibrary& prompts,
                  ScratchSettings scratch);

  // The N Initial Prompt requests of generation 0, without calling anything.
  std::vector<PendingIndividual> initial_requests() const;

  // Generation 0. Throws UsageError when called twice.
  const GenerationRecord& initialize();
  // One evolutionary generation. Throws UsageError before initialize().
  const GenerationRecord& run_generation();

  // initialize, then G generations; `on_generation` sees each record as it
  // is produced.
  RunResult run(const std::function<void(const GenerationRecord&)>& on_generation = {});

  const std::vector<GenerationRecord>& history() const noexcept { return history_; }
  const std::vector<Individual>& population() const noexcept { return population_; }
  const BanditState& fail_bandit() const noexcept { return fail_bandit_; }
  const BanditState& success_bandit() const noexcept { return success_bandit_; }
  // All-time best; only valid after initialize().
  const Individual& best() const;

 private:
  EvalContext eval_context() const;
  std::vector<Individual> realize_all(std::span<const PendingIndividual> batch) const;
  void track_best(std::span<const Individual> candidates);
  const GenerationRecord& emit(GenerationRecord rec);

  const ProblemSpec& spec_;
  EvolutionConfig cfg_;
  LlmProvider& provider_;
  const Evaluator& evaluator_;
  const PromptLibrary& prompts_;
  ScratchSettings scratch_;

  std::vector<Individual> population_;
  BanditState fail_bandit_;
  BanditState success_bandit_;
  IndividualId next_id_ = 0;
  int generation_ = -1;
  std::optional<Individual> best_;
  std::vector<GenerationRecord> history_;
};

}  // namespace rtlevo
