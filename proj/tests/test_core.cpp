#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rtlevo/errors.hpp"
#include "rtlevo/fitness.hpp"
#include "rtlevo/rng.hpp"
#include "rtlevo/types.hpp"

using namespace rtlevo;

namespace {

EvalOutcome passed_with(PpaMetrics ppa) {
  EvalOutcome o;
  o.sim_passed = true;
  o.synth_succeeded = true;
  o.ppa = ppa;
  o.sim_log = "ok";
  o.synth_log = "ok";
  return o;
}

ProblemSpec valid_spec() {
  ProblemSpec s;
  s.name = "adder";
  s.functional_description = "adds";
  s.reference_ppa = {1.0, 2.0, 3.0};
  return s;
}

}  // namespace

TEST_CASE("classify follows simulation only") {
  Individual ind;
  ind.outcome = EvalOutcome{};
  ind.outcome->sim_passed = true;
  CHECK(classify(ind) == PopulationLabel::Success);

  ind.outcome->sim_passed = false;
  CHECK(classify(ind) == PopulationLabel::Fail);

  ind.outcome->sim_passed = true;
  ind.outcome->synth_succeeded = false;
  CHECK(classify(ind) == PopulationLabel::Success);

  ind.outcome->post_synth_functional = false;
  CHECK(classify(ind) == PopulationLabel::Success);
}

TEST_CASE("classify rejects unevaluated individuals") {
  Individual ind;
  CHECK_THROWS_AS(classify(ind), UsageError);
}

TEST_CASE("lineage is empty only without parents and strategy") {
  Lineage l;
  CHECK(l.empty());
  l.strategy = PromptStrategy::Fix;
  CHECK_FALSE(l.empty());
}

TEST_CASE("problem spec invariants") {
  CHECK_NOTHROW(valid_spec().validate());
  auto s = valid_spec();
  s.functional_description.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = valid_spec();
  s.target_clock_period = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = valid_spec();
  s.reference_ppa.area = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(ProblemSpec{}.target_clock_period == doctest::Approx(0.01));
}

TEST_CASE("enum names round-trip") {
  for (auto s : kAllStrategies) CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_FALSE(strategy_from_string("Mutate").has_value());
  CHECK(label_from_string("Fail") == PopulationLabel::Fail);
  CHECK(circuit_kind_from_string("sequential") == CircuitKind::Sequential);
  CHECK(arity(PromptStrategy::Fusion) == 2);
  CHECK(arity(PromptStrategy::Fix) == 1);
}

TEST_CASE("default weights by circuit kind") {
  const auto comb = FitnessWeights::for_circuit(CircuitKind::Combinational);
  CHECK(comb.alpha == 0.5);
  CHECK(comb.beta == 0.5);
  CHECK(comb.gamma == 0.0);
  const auto seq = FitnessWeights::for_circuit(CircuitKind::Sequential);
  CHECK(seq.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(seq.beta == doctest::Approx(1.0 / 3.0));
  CHECK(seq.gamma == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("weights validation") {
  CHECK_THROWS_AS((FitnessWeights{-0.1, 0.5, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((FitnessWeights{0.0, 0.0, 0.0}.validate()), ConfigError);
  CHECK_NOTHROW((FitnessWeights{0.0, 0.0, 1.0}.validate()));
}

TEST_CASE("effective period") {
  CHECK(effective_period(0.01, 0.0) == doctest::Approx(0.01));
  CHECK(effective_period(0.01, -0.49) == doctest::Approx(0.50));
  CHECK(effective_period(0.01, 0.005) == doctest::Approx(0.005));
  CHECK(effective_period(0.01, 0.5) == kMinEffectivePeriod);
  CHECK(effective_period(0.01, 0.5, 1e-3) == 1e-3);
}

TEST_CASE("compute_fitness worked examples") {
  const PpaMetrics ref{100, 200, 10};
  const FitnessWeights thirds{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(compute_fitness(ref, ref, thirds) == 0.0);
  CHECK(compute_fitness({50, 200, 10}, ref, thirds) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(compute_fitness({150, 100, 1}, {100, 100, 1}, {0.5, 0.5, 0.0}) ==
        doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("compute_fitness rejects non-positive references") {
  const PpaMetrics gen{1, 1, 1};
  const FitnessWeights w;
  CHECK_THROWS_AS(compute_fitness(gen, {0, 1, 1}, w), ConfigError);
  CHECK_THROWS_AS(compute_fitness(gen, {1, -1, 1}, w), ConfigError);
  CHECK_THROWS_AS(compute_fitness(gen, {1, 1, 0}, w), ConfigError);
}

TEST_CASE("fitness_of sentinels") {
  const PpaMetrics ref{1, 1, 1};
  EvalOutcome failed;
  failed.sim_passed = false;
  CHECK(fitness_of(failed, ref, {}) == -std::numeric_limits<double>::infinity());
  CHECK(fitness_of(passed_with(ref), ref, {}) == 0.0);
  EvalOutcome no_synth;
  no_synth.sim_passed = true;
  CHECK(fitness_of(no_synth, ref, {}) == -1e9);
}

TEST_CASE("fitness properties over random inputs") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const PpaMetrics ref{uniform_real(rng, 1, 1e4), uniform_real(rng, 1, 1e4), uniform_real(rng, 1, 1e4)};
    const PpaMetrics gen{uniform_real(rng, 1, 1e4), uniform_real(rng, 1, 1e4), uniform_real(rng, 1, 1e4)};
    const FitnessWeights w{uniform01(rng), uniform01(rng), uniform01(rng) + 0.01};
    const double f = compute_fitness(gen, ref, w);

    // Each term equals 1 - gen/ref.
    const double identity = w.alpha * (1 - gen.power / ref.power) +
                            w.beta * (1 - gen.area / ref.area) +
                            w.gamma * (1 - gen.effective_clock_period / ref.effective_clock_period);
    CHECK(f == doctest::Approx(identity).epsilon(1e-9));

    // Strictly decreasing in each positively weighted metric.
    auto worse = gen;
    worse.effective_clock_period *= 1.01;
    CHECK(compute_fitness(worse, ref, w) < f);

    // Linear in each relative term: scaling the power term by s scales its contribution.
    const double s = uniform_real(rng, 0.1, 3.0);
    auto scaled = gen;
    scaled.power = ref.power - s * (ref.power - gen.power);
    const double base = compute_fitness({ref.power, gen.area, gen.effective_clock_period}, ref, w);
    CHECK(compute_fitness(scaled, ref, w) - base ==
          doctest::Approx(s * (f - base)).epsilon(1e-6).scale(1.0));

    // A simulation failure never outranks a finite result.
    EvalOutcome failed;
    CHECK(fitness_of(failed, ref, w) < f);
  }
}

TEST_CASE("stream seeds are independent of draw order") {
  CHECK(stream_seed(1, 2, 3) == stream_seed(1, 2, 3));
  CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 2));
  CHECK(stream_seed(1, 2, 3) != stream_seed(2, 2, 3));
  auto a = stream_rng(5, 1, 0);
  auto b = stream_rng(5, 1, 0);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("uniform helpers stay in range") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_index(rng, 7) < 7u);
  }
}

TEST_CASE("sample_index follows weights") {
  Rng rng(11);
  const std::vector<double> w{1.0, 0.0, 3.0};
  std::vector<int> counts(3, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) counts[sample_index(w, rng)]++;
  CHECK(counts[1] == 0);
  CHECK(counts[0] / double(n) == doctest::Approx(0.25).epsilon(0.05));
  CHECK(counts[2] / double(n) == doctest::Approx(0.75).epsilon(0.05));

  const std::vector<double> zeros{0.0, 0.0};
  std::vector<int> z(2, 0);
  for (int i = 0; i < 1000; ++i) z[sample_index(zeros, rng)]++;
  CHECK(z[0] > 0);
  CHECK(z[1] > 0);
}
