#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "doctest.h"
#include "rtlevo/errors.hpp"
#include "rtlevo/evolution.hpp"
#include "rtlevo/simulated_provider.hpp"

using namespace rtlevo;
namespace fs = std::filesystem;

namespace {

Individual member(IndividualId id, double fitness, int gen = 0,
                  std::optional<PpaMetrics> ppa = std::nullopt) {
  Individual ind;
  ind.id = id;
  ind.code = "module m; endmodule";
  ind.thought = "t";
  ind.feedback = "f";
  ind.generation_born = gen;
  ind.outcome = EvalOutcome{};
  ind.outcome->sim_passed = std::isfinite(fitness) || fitness == kSynthFailFitness;
  ind.outcome->synth_succeeded = ppa.has_value();
  ind.outcome->ppa = ppa;
  ind.fitness = fitness;
  return ind;
}

// Exact rational oracle for the quota: compare remainders by cross
// multiplication, assign the spare offspring to Fail on ties.
OffspringQuota quota_oracle(int f, int s, int lambda) {
  if (f == 0) return {0, lambda};
  if (s == 0) return {lambda, 0};
  OffspringQuota best{};
  double best_err = 1e300;
  for (int qf = 0; qf <= lambda; ++qf) {
    const int qs = lambda - qf;
    // Largest remainder is the integer split closest to the exact shares,
    // with Fail winning an exact tie.
    const double err = std::abs(qf - static_cast<double>(lambda) * f / (f + s));
    if (qf >= (lambda * f) / (f + s) && qf <= (lambda * f) / (f + s) + 1 && err < best_err - 1e-12) {
      best = {qf, qs};
      best_err = err;
    } else if (std::abs(err - best_err) <= 1e-12 && qf > best.fail) {
      best = {qf, qs};
    }
  }
  return best;
}

// Survivor oracle written without sorting: repeated arg-max by an explicit key.
std::vector<IndividualId> survivor_oracle(const std::vector<Individual>& parents,
                                          const std::vector<Individual>& offspring, int n_pop,
                                          int n_elite) {
  const auto key = [](const Individual& x) {
    return std::make_tuple(x.fitness_or_worst(), x.generation_born, -static_cast<long long>(x.id));
  };
  std::vector<IndividualId> chosen;
  const auto is_chosen = [&](IndividualId id) {
    return std::find(chosen.begin(), chosen.end(), id) != chosen.end();
  };
  for (int which = 0; which < 3; ++which) {
    std::set<IndividualId> used_for_metric;
    for (int k = 0; k < n_elite; ++k) {
      const Individual* pick = nullptr;
      for (const auto& p : parents) {
        if (!p.outcome || !p.outcome->ppa || !p.outcome->sim_passed) continue;
        if (used_for_metric.count(p.id)) continue;
        const auto m = [which](const Individual& x) {
          const auto& q = *x.outcome->ppa;
          return which == 0 ? q.power : which == 1 ? q.area : q.effective_clock_period;
        };
        if (!pick || m(p) < m(*pick) || (m(p) == m(*pick) && key(p) > key(*pick))) pick = &p;
      }
      if (!pick) break;
      used_for_metric.insert(pick->id);
      if (!is_chosen(pick->id)) chosen.push_back(pick->id);
    }
  }
  std::vector<const Individual*> pool;
  for (const auto& p : parents) pool.push_back(&p);
  for (const auto& o : offspring) pool.push_back(&o);
  while (static_cast<int>(chosen.size()) < n_pop) {
    const Individual* pick = nullptr;
    for (const auto* c : pool) {
      if (is_chosen(c->id)) continue;
      if (!pick || key(*c) > key(*pick)) pick = c;
    }
    if (!pick) break;
    chosen.push_back(pick->id);
  }
  return chosen;
}

struct Harness {
  ProblemSpec spec;
  SyntheticEvaluator evaluator{SyntheticEvaluatorConfig{}};
  PromptLibrary prompts = PromptLibrary::defaults();
  fs::path scratch;

  explicit Harness(const std::string& tag) {
    spec.name = "top_module";
    spec.functional_description = "An 8-bit adder.";
    spec.testbench_source = "module tb; endmodule";
    spec.reference_ppa = {1.0, 1.0, 1.0};
    scratch = fs::temp_directory_path() / ("rtlevo_evo_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(scratch);
  }
  ~Harness() { fs::remove_all(scratch); }

  EvolutionEngine engine(const EvolutionConfig& cfg, LlmProvider& provider) const {
    return EvolutionEngine(spec, cfg, provider, evaluator, prompts, {scratch, false});
  }
};

EvolutionConfig small_config(std::uint64_t seed) {
  EvolutionConfig c;
  c.population_size = 6;
  c.offspring_count = 6;
  c.max_generations = 6;
  c.rng_seed = seed;
  return c;
}

SimulatedDesigner designer(std::uint64_t seed) {
  SimulatedDesignerConfig c;
  c.seed = seed;
  return SimulatedDesigner(c);
}

// Initial request number zero passes; every other design fails.
class OneCorrectDesigner final : public LlmProvider {
 public:
  CompletionResult complete(const PromptBundle& b) override {
    CompletionResult r;
    if (b.purpose == PromptPurpose::Feedback) {
      r.text = "try again";
      return r;
    }
    const bool pass = b.purpose == PromptPurpose::Initial && initial_++ == 0;
    r.text = render_response("attempt", std::string(pass ? "// @sim: pass\n" : "// @sim: fail\n") +
                                            "// @ppa power=1 area=1 period=1\nmodule top_module; endmodule");
    return r;
  }
  bool order_independent() const noexcept override { return false; }
  std::string describe() const override { return "one-correct"; }

 private:
  int initial_ = 0;
};

}  // namespace

TEST_CASE("offspring quota examples") {
  CHECK(offspring_quota(7, 3, 10) == OffspringQuota{7, 3});
  CHECK(offspring_quota(0, 10, 10) == OffspringQuota{0, 10});
  CHECK(offspring_quota(10, 0, 10) == OffspringQuota{10, 0});
  CHECK(offspring_quota(5, 5, 7) == OffspringQuota{4, 3});
  CHECK(offspring_quota(1, 2, 2) == OffspringQuota{1, 1});
  CHECK_THROWS_AS(offspring_quota(0, 0, 4), UsageError);
  CHECK_THROWS_AS(offspring_quota(1, 1, 0), UsageError);
}

TEST_CASE("offspring quota matches the oracle and sums to lambda") {
  for (int f = 0; f <= 12; ++f) {
    for (int s = 0; s <= 12; ++s) {
      if (f + s == 0) continue;
      for (int lambda = 1; lambda <= 15; ++lambda) {
        const auto q = offspring_quota(f, s, lambda);
        CAPTURE(f);
        CAPTURE(s);
        CAPTURE(lambda);
        CHECK(q.fail + q.success == lambda);
        CHECK(q == quota_oracle(f, s, lambda));
        if (f == 0) CHECK(q.fail == 0);
        if (s == 0) CHECK(q.success == 0);
      }
    }
  }
}

TEST_CASE("ranks_before is a strict total order with the documented tie-breaks") {
  const auto a = member(1, 0.5, 2);
  const auto b = member(2, 0.5, 3);
  const auto c = member(0, 0.5, 2);
  CHECK(ranks_before(member(9, 0.6), a));
  CHECK(ranks_before(b, a));
  CHECK(ranks_before(c, a));
  CHECK_FALSE(ranks_before(a, a));
  CHECK(ranks_before(member(3, kSynthFailFitness), member(4, kNegInfFitness)));
}

TEST_CASE("roulette weights") {
  const std::vector<Individual> pop{member(0, 0.0), member(1, 0.5), member(2, 1.0)};
  const auto w = roulette_weights(pop);
  CHECK(w[0] == doctest::Approx(1e-6));
  CHECK(w[1] == doctest::Approx(0.5 + 1e-6));
  CHECK(w[2] == doctest::Approx(1.0 + 1e-6));
  const std::vector<Individual> flat{member(0, 0.3), member(1, 0.3)};
  CHECK(roulette_weights(flat) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("parent selection frequencies") {
  const std::vector<Individual> pop{member(0, 0.0), member(1, 0.5), member(2, 1.0)};
  Rng rng(123);
  std::map<std::size_t, int> hits;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    const auto p = select_parents(pop, PopulationLabel::Success, PromptStrategy::Improve, rng);
    REQUIRE(p.size() == 1);
    ++hits[p[0]];
  }
  const double total = 1.5 + 3e-6;
  CHECK(hits[1] / double(draws) == doctest::Approx((0.5 + 1e-6) / total).epsilon(0.03));
  CHECK(hits[2] / double(draws) == doctest::Approx((1.0 + 1e-6) / total).epsilon(0.03));
  CHECK(hits[0] < 10);

  std::map<std::size_t, int> uniform;
  for (int i = 0; i < draws; ++i) {
    ++uniform[select_parents(pop, PopulationLabel::Fail, PromptStrategy::Fix, rng)[0]];
  }
  for (std::size_t k = 0; k < 3; ++k) CHECK(uniform[k] / double(draws) == doctest::Approx(1.0 / 3).epsilon(0.05));
}

TEST_CASE("fusion parents are distinct") {
  Rng rng(5);
  const std::vector<Individual> two{member(0, 0.0), member(1, 1.0)};
  const std::vector<Individual> flat{member(0, 0.2), member(1, 0.2), member(2, 0.2)};
  for (int i = 0; i < 2000; ++i) {
    auto p = select_parents(two, PopulationLabel::Success, PromptStrategy::Fusion, rng);
    REQUIRE(p.size() == 2);
    CHECK(p[0] != p[1]);
    p = select_parents(flat, PopulationLabel::Success, PromptStrategy::Fusion, rng);
    CHECK(p[0] != p[1]);
  }
  const std::vector<Individual> one{member(0, 0.2)};
  CHECK_THROWS_AS(select_parents(one, PopulationLabel::Success, PromptStrategy::Fusion, rng), UsageError);
}

TEST_CASE("survivor selection matches the oracle on random pools") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    EvolutionConfig cfg;
    cfg.population_size = 3 + static_cast<int>(uniform_index(rng, 8));
    cfg.elite_per_metric = static_cast<int>(uniform_index(rng, cfg.population_size / 3 + 1));
    std::vector<Individual> parents, offspring;
    IndividualId id = 0;
    const auto make = [&](int gen) {
      const double u = uniform01(rng);
      if (u < 0.25) return member(id++, kNegInfFitness, gen);
      if (u < 0.3) return member(id++, kSynthFailFitness, gen);
      // Coarse values force ties on fitness and metrics.
      const PpaMetrics m{1.0 + uniform_index(rng, 3), 1.0 + uniform_index(rng, 3), 1.0 + uniform_index(rng, 3)};
      return member(id++, 0.1 * static_cast<double>(uniform_index(rng, 4)), gen, m);
    };
    for (int i = 0; i < cfg.population_size; ++i) parents.push_back(make(static_cast<int>(uniform_index(rng, 3))));
    const int lambda = 1 + static_cast<int>(uniform_index(rng, 10));
    for (int i = 0; i < lambda; ++i) offspring.push_back(make(3));

    const auto next = survivor_select(parents, offspring, cfg);
    std::vector<IndividualId> ids;
    for (const auto& s : next) ids.push_back(s.id);
    CHECK(ids == survivor_oracle(parents, offspring, cfg.population_size, cfg.elite_per_metric));
    CHECK(next.size() == static_cast<std::size_t>(cfg.population_size));
    CHECK(std::set<IndividualId>(ids.begin(), ids.end()).size() == ids.size());
  }
}

TEST_CASE("per-metric elites survive even with poor fitness") {
  EvolutionConfig cfg;
  cfg.population_size = 3;
  cfg.elite_per_metric = 1;
  const std::vector<Individual> parents{member(0, -5.0, 0, PpaMetrics{0.1, 8, 8}),
                                        member(1, 0.2, 0, PpaMetrics{9, 9, 9})};
  const std::vector<Individual> offspring{member(2, 0.9, 1, PpaMetrics{1, 1, 1}),
                                          member(3, 0.8, 1, PpaMetrics{1, 1, 1}),
                                          member(4, 0.7, 1, PpaMetrics{1, 1, 1})};
  const auto next = survivor_select(parents, offspring, cfg);
  REQUIRE(next.size() == 3);
  CHECK(next[0].id == 0);
  CHECK(next[1].id == 2);
  CHECK(next[2].id == 3);
}

TEST_CASE("offspring rewards") {
  const std::vector<Individual> parents{member(0, 0.2), member(1, 0.4)};
  CHECK(offspring_reward(PopulationLabel::Success, member(2, 0.5), parents, 1.0) == 1.0);
  CHECK(offspring_reward(PopulationLabel::Success, member(2, 0.4), parents, 1.0) == 0.0);
  CHECK(offspring_reward(PopulationLabel::Success, member(2, 0.3), parents, 2.0) == 0.0);
  const std::vector<Individual> failing{member(0, kNegInfFitness)};
  CHECK(offspring_reward(PopulationLabel::Fail, member(2, -3.0), failing, 2.0) == 2.0);
  CHECK(offspring_reward(PopulationLabel::Fail, member(2, kSynthFailFitness), failing, 1.0) == 1.0);
  CHECK(offspring_reward(PopulationLabel::Fail, member(2, kNegInfFitness), failing, 1.0) == 0.0);
}

TEST_CASE("engine config validation") {
  auto bad = small_config(0);
  bad.population_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small_config(0);
  bad.elite_per_metric = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small_config(0);
  bad.temperature = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small_config(0);
  bad.max_generations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("engine invariants over a simulated run") {
  Harness h("invariants");
  auto provider = designer(3);
  auto cfg = small_config(3);
  cfg.max_generations = 10;
  auto engine = h.engine(cfg, provider);
  CHECK_THROWS_AS(engine.run_generation(), UsageError);
  const auto result = engine.run();
  const auto& hist = result.history;
  REQUIRE(hist.size() == 11);

  double prev_best = kNegInfFitness;
  std::set<IndividualId> seen;
  for (const auto& rec : hist) {
    CAPTURE(rec.generation_index);
    CHECK(rec.population.size() == 6u);
    CHECK(rec.fail_count + rec.success_count == 6);
    CHECK(rec.best_fitness >= prev_best);
    prev_best = rec.best_fitness;
    for (const auto& o : (rec.generation_index == 0 ? rec.population : rec.offspring)) {
      CHECK(seen.insert(o.id).second);
      CHECK(o.generation_born == rec.generation_index);
      CHECK(o.fitness.has_value());
      CHECK(o.feedback.has_value());
    }
    if (rec.generation_index > 0) {
      CHECK(rec.offspring.size() == 6u);
      CHECK(rec.quota_fail + rec.quota_success == 6);
      CHECK(rec.strategy_events.size() == 6u);
      const auto& prev = hist[static_cast<std::size_t>(rec.generation_index - 1)];
      int prev_fail = 0;
      for (const auto& p : prev.population) prev_fail += classify(p) == PopulationLabel::Fail;
      CHECK(OffspringQuota{rec.quota_fail, rec.quota_success} ==
            offspring_quota(prev_fail, 6 - prev_fail, 6));
      for (std::size_t i = 0; i < rec.offspring.size(); ++i) {
        const auto& o = rec.offspring[i];
        const auto label = static_cast<int>(i) < rec.quota_fail ? PopulationLabel::Fail : PopulationLabel::Success;
        CHECK(rec.strategy_events[i].label == label);
        CHECK(rec.strategy_events[i].offspring == o.id);
        REQUIRE(o.lineage.strategy.has_value());
        const auto allowed = allowed_strategies(label);
        CHECK(std::find(allowed.begin(), allowed.end(), *o.lineage.strategy) != allowed.end());
        CHECK(o.lineage.parents.size() == static_cast<std::size_t>(arity(*o.lineage.strategy)));
        for (auto pid : o.lineage.parents) {
          const auto it = std::find_if(prev.population.begin(), prev.population.end(),
                                       [&](const Individual& p) { return p.id == pid; });
          REQUIRE(it != prev.population.end());
          CHECK(classify(*it) == label);
        }
      }
      std::uint64_t pulls = 0;
      for (const auto& a : rec.fail_bandit.arms) pulls += a.stats.pull_count;
      CHECK(pulls == rec.fail_bandit.total_pulls);
    }
  }
  std::uint64_t total = hist.back().fail_bandit.total_pulls + hist.back().success_bandit.total_pulls;
  CHECK(total == 60u);
  CHECK(result.best.id == hist.back().best_so_far);
  CHECK(result.best.fitness_or_worst() == hist.back().best_fitness);
}

TEST_CASE("engine is deterministic and execution mode does not matter") {
  Harness h("determinism");
  auto p1 = designer(17);
  auto p2 = designer(17);
  auto p3 = designer(17);
  auto cfg = small_config(17);
  auto serial_cfg = cfg;
  serial_cfg.execution = ExecutionMode::Serial;
  const auto a = h.engine(cfg, p1).run();
  const auto b = h.engine(cfg, p2).run();
  const auto c = h.engine(serial_cfg, p3).run();
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    CHECK(a.history[g].population == b.history[g].population);
    CHECK(a.history[g].offspring == c.history[g].offspring);
    CHECK(a.history[g].fail_bandit == c.history[g].fail_bandit);
    CHECK(a.history[g].success_bandit == c.history[g].success_bandit);
  }
  auto p4 = designer(17);
  auto other = small_config(18);
  const auto d = h.engine(other, p4).run();
  CHECK_FALSE(d.history.back().population == a.history.back().population);
}

TEST_CASE("an all-fail run never touches the Success side") {
  Harness h("allfail");
  SimulatedDesignerConfig dc;
  dc.initial_fail_probability = 1.0;
  dc.fix_success_probability = 0.0;
  dc.repair_probability = 0.0;
  SimulatedDesigner provider(dc);
  auto cfg = small_config(1);
  const auto result = h.engine(cfg, provider).run();
  CHECK_FALSE(result.found_correct);
  CHECK(result.history.back().best_fitness == kNegInfFitness);
  for (const auto& rec : result.history) {
    CHECK(rec.success_count == 0);
    CHECK(rec.quota_success == 0);
    CHECK(rec.success_bandit.total_pulls == 0);
  }
  CHECK(result.history.back().fail_bandit.total_pulls == 36u);
}

TEST_CASE("fusion with one Success parent is resampled and noted") {
  Harness h("fusion");
  OneCorrectDesigner provider;
  auto cfg = small_config(2);
  cfg.population_size = 4;
  cfg.offspring_count = 4;
  cfg.max_generations = 8;
  const auto result = h.engine(cfg, provider).run();
  CHECK(result.found_correct);
  int notes = 0;
  for (const auto& rec : result.history) {
    CHECK(rec.success_count == 1);
    notes += static_cast<int>(rec.notes.size());
    for (const auto& o : rec.offspring) CHECK(o.lineage.strategy != PromptStrategy::Fusion);
    for (const auto& n : rec.notes) CHECK(n.find("Fusion needs 2 parents, 1 available") != std::string::npos);
  }
  CHECK(notes > 0);
  const auto& snap = result.history.back().success_bandit;
  for (const auto& arm : snap.arms) {
    if (arm.strategy == PromptStrategy::Fusion) CHECK(arm.stats.pull_count == 0);
  }
}

TEST_CASE("initialize twice is a usage error") {
  Harness h("twice");
  auto provider = designer(1);
  auto engine = h.engine(small_config(1), provider);
  CHECK_THROWS_AS(engine.best(), UsageError);
  engine.initialize();
  CHECK_THROWS_AS(engine.initialize(), UsageError);
  CHECK(engine.initial_requests().size() == 6u);
}
