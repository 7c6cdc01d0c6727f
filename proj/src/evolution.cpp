#include "rtlevo/evolution.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "rtlevo/errors.hpp"

namespace rtlevo {

namespace {

// Salts the provider's per-request streams away from the engine's own draws.
constexpr std::uint64_t kProviderSalt = 0x9e3779b97f4a7c15ull;

constexpr double kRouletteEpsilon = 1e-6;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("evolution." + what);
}

double metric(const PpaMetrics& m, int which) {
  switch (which) {
    case 0: return m.power;
    case 1: return m.area;
    default: return m.effective_clock_period;
  }
}

bool has_ppa(const Individual& ind) {
  return ind.outcome && ind.outcome->sim_passed && ind.outcome->synth_succeeded &&
         ind.outcome->ppa.has_value();
}

}  // namespace

void EvolutionConfig::validate() const {
  require(population_size >= 1, "population_size must be >= 1");
  require(offspring_count >= 1, "offspring_count must be >= 1");
  require(max_generations >= 1, "max_generations must be >= 1");
  require(elite_per_metric >= 0, "elite_per_metric must be >= 0");
  require(3 * elite_per_metric <= population_size,
          "elite_per_metric must satisfy 3 * elite_per_metric <= population_size");
  require(exploration_c >= 0.0, "exploration_c must be >= 0");
  require(temperature > 0.0, "temperature must be > 0");
  require(max_threads >= 0, "max_threads must be >= 0");
  weights.validate();
}

OffspringQuota offspring_quota(int fail_count, int success_count, int lambda) {
  if (fail_count < 0 || success_count < 0 || fail_count + success_count == 0 || lambda < 1) {
    throw UsageError("offspring_quota: need non-negative counts with a positive sum and lambda >= 1");
  }
  if (fail_count == 0) return {0, lambda};
  if (success_count == 0) return {lambda, 0};

  const long long n = fail_count + success_count;
  const long long fail_num = static_cast<long long>(lambda) * fail_count;
  const long long success_num = static_cast<long long>(lambda) * success_count;
  OffspringQuota q{static_cast<int>(fail_num / n), static_cast<int>(success_num / n)};
  const int leftover = lambda - q.fail - q.success;  // 0 or 1
  if (leftover > 0) {
    if (fail_num % n >= success_num % n) {
      q.fail += leftover;
    } else {
      q.success += leftover;
    }
  }
  return q;
}

bool ranks_before(const Individual& a, const Individual& b) noexcept {
  const double fa = a.fitness_or_worst();
  const double fb = b.fitness_or_worst();
  if (fa != fb) return fa > fb;
  if (a.generation_born != b.generation_born) return a.generation_born > b.generation_born;
  return a.id < b.id;
}

std::vector<double> roulette_weights(std::span<const Individual> subpop) {
  std::vector<double> w(subpop.size(), 1.0);
  if (subpop.empty()) return w;
  double lo = subpop.front().fitness_or_worst();
  double hi = lo;
  for (const auto& ind : subpop) {
    lo = std::min(lo, ind.fitness_or_worst());
    hi = std::max(hi, ind.fitness_or_worst());
  }
  if (lo == hi) return w;
  for (std::size_t i = 0; i < subpop.size(); ++i) {
    w[i] = subpop[i].fitness_or_worst() - lo + kRouletteEpsilon;
  }
  return w;
}

std::vector<std::size_t> select_parents(std::span<const Individual> subpop, PopulationLabel label,
                                        PromptStrategy strategy, Rng& rng) {
  const auto k = static_cast<std::size_t>(arity(strategy));
  if (subpop.size() < k) {
    throw UsageError(std::string(to_string(strategy)) + " needs " + std::to_string(k) +
                     " parents but the sub-population has " + std::to_string(subpop.size()));
  }
  auto weights = label == PopulationLabel::Success ? roulette_weights(subpop)
                                                   : std::vector<double>(subpop.size(), 1.0);
  std::vector<std::size_t> picked;
  for (std::size_t draw = 0; draw < k; ++draw) {
    const auto i = sample_index(weights, rng);
    picked.push_back(i);
    weights[i] = 0.0;
    // Once every remaining weight is zero sample_index goes uniform, which
    // could repeat a parent; restrict explicitly.
    if (draw + 1 < k && std::all_of(weights.begin(), weights.end(), [](double x) { return x == 0.0; })) {
      for (std::size_t j = 0; j < weights.size(); ++j) {
        if (std::find(picked.begin(), picked.end(), j) == picked.end()) weights[j] = 1.0;
      }
    }
  }
  return picked;
}

std::vector<Individual> survivor_select(std::span<const Individual> parents,
                                        std::span<const Individual> offspring,
                                        const EvolutionConfig& cfg) {
  const auto n_pop = static_cast<std::size_t>(cfg.population_size);
  std::vector<Individual> next;
  next.reserve(n_pop);
  std::unordered_set<IndividualId> taken;

  std::vector<const Individual*> synthesized;
  for (const auto& p : parents) {
    if (has_ppa(p)) synthesized.push_back(&p);
  }
  for (int which = 0; which < 3; ++which) {
    auto order = synthesized;
    std::sort(order.begin(), order.end(), [which](const Individual* a, const Individual* b) {
      const double ma = metric(*a->outcome->ppa, which);
      const double mb = metric(*b->outcome->ppa, which);
      if (ma != mb) return ma < mb;
      return ranks_before(*a, *b);
    });
    const auto take = std::min<std::size_t>(order.size(), static_cast<std::size_t>(cfg.elite_per_metric));
    for (std::size_t i = 0; i < take; ++i) {
      if (taken.insert(order[i]->id).second) next.push_back(*order[i]);
    }
  }

  std::vector<const Individual*> pool;
  pool.reserve(parents.size() + offspring.size());
  for (const auto& p : parents) pool.push_back(&p);
  for (const auto& o : offspring) pool.push_back(&o);
  std::sort(pool.begin(), pool.end(),
            [](const Individual* a, const Individual* b) { return ranks_before(*a, *b); });
  for (const auto* ind : pool) {
    if (next.size() >= n_pop) break;
    if (taken.insert(ind->id).second) next.push_back(*ind);
  }
  return next;
}

double offspring_reward(PopulationLabel label, const Individual& offspring,
                        std::span<const Individual> parents, double reward) {
  if (label == PopulationLabel::Fail) {
    return offspring.outcome && offspring.outcome->sim_passed ? reward : 0.0;
  }
  double best_parent = kNegInfFitness;
  for (const auto& p : parents) best_parent = std::max(best_parent, p.fitness_or_worst());
  return offspring.fitness_or_worst() > best_parent ? reward : 0.0;
}

// ---------------------------------------------------------------------------

EvolutionEngine::EvolutionEngine(const ProblemSpec& spec, EvolutionConfig cfg,
                                 LlmProvider& provider, const Evaluator& evaluator,
                                 const PromptLibrary& prompts, ScratchSettings scratch)
    : spec_(spec),
      cfg_(std::move(cfg)),
      provider_(provider),
      evaluator_(evaluator),
      prompts_(prompts),
      scratch_(std::move(scratch)),
      fail_bandit_(allowed_strategies(PopulationLabel::Fail), cfg_.exploration_c, cfg_.temperature),
      success_bandit_(allowed_strategies(PopulationLabel::Success), cfg_.exploration_c,
                      cfg_.temperature) {
  spec_.validate();
  cfg_.validate();
}

EvalContext EvolutionEngine::eval_context() const {
  return EvalContext{spec_,     cfg_.weights,          evaluator_,  provider_,
                     prompts_,  scratch_.root,         scratch_.keep_artifacts, cfg_.rng_seed};
}

std::vector<PendingIndividual> EvolutionEngine::initial_requests() const {
  std::vector<PendingIndividual> out;
  for (int i = 0; i < cfg_.population_size; ++i) {
    PendingIndividual p;
    p.draft.id = static_cast<IndividualId>(i);
    p.draft.generation_born = 0;
    p.prompt = prompts_.initial(spec_);
    p.prompt.stream_seed = stream_seed(cfg_.rng_seed ^ kProviderSalt, 0, static_cast<std::uint64_t>(i));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Individual> EvolutionEngine::realize_all(std::span<const PendingIndividual> batch) const {
  return realize_batch(batch, eval_context(), cfg_.execution, cfg_.max_threads);
}

void EvolutionEngine::track_best(std::span<const Individual> candidates) {
  for (const auto& c : candidates) {
    if (!best_ || ranks_before(c, *best_)) best_ = c;
  }
}

const Individual& EvolutionEngine::best() const {
  if (!best_) throw UsageError("no individual has been evaluated yet");
  return *best_;
}

const GenerationRecord& EvolutionEngine::emit(GenerationRecord rec) {
  rec.generation_index = generation_;
  rec.population = population_;
  rec.best_so_far = best_->id;
  rec.best_fitness = best_->fitness_or_worst();
  for (const auto& ind : population_) {
    if (classify(ind) == PopulationLabel::Fail) {
      ++rec.fail_count;
    } else {
      ++rec.success_count;
    }
  }
  rec.fail_bandit = fail_bandit_.snapshot();
  rec.success_bandit = success_bandit_.snapshot();
  history_.push_back(std::move(rec));
  return history_.back();
}

const GenerationRecord& EvolutionEngine::initialize() {
  if (generation_ >= 0) throw UsageError("initialize() called twice");
  const auto requests = initial_requests();
  population_ = realize_all(requests);
  next_id_ = static_cast<IndividualId>(cfg_.population_size);
  generation_ = 0;
  track_best(population_);
  return emit({});
}

const GenerationRecord& EvolutionEngine::run_generation() {
  if (generation_ < 0) throw UsageError("run_generation() before initialize()");
  const int gen = generation_ + 1;

  std::vector<Individual> fail_pop;
  std::vector<Individual> success_pop;
  for (const auto& ind : population_) {
    (classify(ind) == PopulationLabel::Fail ? fail_pop : success_pop).push_back(ind);
  }
  const auto quota = offspring_quota(static_cast<int>(fail_pop.size()),
                                     static_cast<int>(success_pop.size()), cfg_.offspring_count);

  GenerationRecord rec;
  rec.quota_fail = quota.fail;
  rec.quota_success = quota.success;

  // Strategy choices use the bandit state frozen at the start of the generation.
  std::vector<PendingIndividual> batch;
  std::vector<PopulationLabel> labels;
  std::vector<std::vector<Individual>> parents_of;
  for (int slot = 0; slot < cfg_.offspring_count; ++slot) {
    const auto label = slot < quota.fail ? PopulationLabel::Fail : PopulationLabel::Success;
    const auto& subpop = label == PopulationLabel::Fail ? fail_pop : success_pop;
    const auto& bandit = label == PopulationLabel::Fail ? fail_bandit_ : success_bandit_;
    auto rng = stream_rng(cfg_.rng_seed, static_cast<std::uint64_t>(gen),
                          static_cast<std::uint64_t>(slot));

    auto strategy = bandit.select(rng);
    if (static_cast<std::size_t>(arity(strategy)) > subpop.size()) {
      std::vector<PromptStrategy> feasible;
      for (auto s : bandit.arms()) {
        if (static_cast<std::size_t>(arity(s)) <= subpop.size()) feasible.push_back(s);
      }
      const auto resampled = bandit.select_among(feasible, rng);
      rec.notes.push_back("generation " + std::to_string(gen) + " slot " + std::to_string(slot) +
                          ": " + std::string(to_string(strategy)) + " needs " +
                          std::to_string(arity(strategy)) + " parents, " +
                          std::to_string(subpop.size()) + " available; resampled " +
                          std::string(to_string(resampled)));
      strategy = resampled;
    }

    std::vector<Individual> parents;
    for (auto i : select_parents(subpop, label, strategy, rng)) parents.push_back(subpop[i]);

    PendingIndividual p;
    p.draft.id = next_id_++;
    p.draft.generation_born = gen;
    p.draft.lineage.strategy = strategy;
    for (const auto& par : parents) p.draft.lineage.parents.push_back(par.id);
    p.prompt = prompts_.evolutionary(strategy, spec_, parents);
    p.prompt.stream_seed = stream_seed(cfg_.rng_seed ^ kProviderSalt, static_cast<std::uint64_t>(gen),
                                       static_cast<std::uint64_t>(slot));
    batch.push_back(std::move(p));
    labels.push_back(label);
    parents_of.push_back(std::move(parents));
  }

  auto offspring = realize_all(batch);

  for (std::size_t i = 0; i < offspring.size(); ++i) {
    const auto strategy = *offspring[i].lineage.strategy;
    const double r = offspring_reward(labels[i], offspring[i], parents_of[i], cfg_.reward);
    (labels[i] == PopulationLabel::Fail ? fail_bandit_ : success_bandit_).record_reward(strategy, r);
    rec.strategy_events.push_back({labels[i], strategy, r, offspring[i].id});
  }

  population_ = survivor_select(population_, offspring, cfg_);
  generation_ = gen;
  track_best(offspring);
  rec.offspring = std::move(offspring);
  return emit(std::move(rec));
}

RunResult EvolutionEngine::run(const std::function<void(const GenerationRecord&)>& on_generation) {
  const auto& first = initialize();
  if (on_generation) on_generation(first);
  for (int g = 0; g < cfg_.max_generations; ++g) {
    const auto& rec = run_generation();
    if (on_generation) on_generation(rec);
  }
  RunResult result;
  result.best = best();
  result.found_correct = result.best.outcome && result.best.outcome->sim_passed;
  result.history = history_;
  return result;
}

}  // namespace rtlevo
