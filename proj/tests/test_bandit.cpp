#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rtlevo/bandit.hpp"
#include "rtlevo/errors.hpp"
#include "rtlevo/prompts.hpp"

using namespace rtlevo;

namespace {

BanditState fail_bandit(double c = 2.0, double tau = 1.0) {
  return BanditState(allowed_strategies(PopulationLabel::Fail), c, tau);
}

}  // namespace

TEST_CASE("ucb score closed form") {
  CHECK(ucb_score({0.5, 4}, 10, 2.0) == doctest::Approx(0.5 + 2.0 * std::sqrt(std::log(10.0) / 4.0)));
  CHECK(ucb_score({0.5, 4}, 10, 2.0) == doctest::Approx(2.017427).epsilon(1e-6));
  CHECK(ucb_score({0.7, 5}, 5, 0.0) == doctest::Approx(0.7));
  CHECK(ucb_score({0.0, 0}, 3, 2.0) == kUntriedScore);
  CHECK(ucb_score({0.0, 0}, 3, 2.0) > 1e308);
}

TEST_CASE("record_reward is an incremental mean") {
  auto b = fail_bandit();
  b.record_reward(PromptStrategy::Fix, 1.0);
  CHECK(b.stats(PromptStrategy::Fix).q_value == 1.0);
  b.record_reward(PromptStrategy::Fix, 0.0);
  CHECK(b.stats(PromptStrategy::Fix).q_value == 0.5);

  auto c = fail_bandit();
  for (double r : {1.0, 1.0, 0.0, 1.0}) c.record_reward(PromptStrategy::Explore, r);
  CHECK(c.stats(PromptStrategy::Explore).q_value == doctest::Approx(0.75));
  CHECK(c.stats(PromptStrategy::Explore).pull_count == 4);
  CHECK(c.total_pulls() == 4);
}

TEST_CASE("record_reward rejects strategies outside the set") {
  auto b = fail_bandit();
  CHECK_THROWS_AS(b.record_reward(PromptStrategy::Fusion, 1.0), UsageError);
}

TEST_CASE("q stays the arithmetic mean over long sequences") {
  Rng rng(17);
  auto b = fail_bandit();
  std::vector<double> rewards;
  for (int i = 0; i < 10000; ++i) {
    const double r = uniform01(rng);
    rewards.push_back(r);
    b.record_reward(PromptStrategy::Improve, r);
  }
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
  CHECK(std::abs(b.stats(PromptStrategy::Improve).q_value - mean) <= 1e-12);
}

TEST_CASE("total pulls equals the sum of arm pulls") {
  Rng rng(4);
  auto b = fail_bandit();
  for (int i = 0; i < 300; ++i) {
    const auto& arms = b.arms();
    b.record_reward(arms[uniform_index(rng, arms.size())], uniform01(rng) < 0.5 ? 1.0 : 0.0);
  }
  std::uint64_t sum = 0;
  for (auto s : b.arms()) sum += b.stats(s).pull_count;
  CHECK(sum == b.total_pulls());
}

TEST_CASE("softmax examples") {
  const std::vector<double> equal(5, 3.0);
  for (double p : softmax(equal, 1.0)) CHECK(p == doctest::Approx(0.2));

  const auto p = softmax(std::vector<double>{1.0, 0.0}, 1.0);
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));
  CHECK(p[0] == doctest::Approx(0.731059).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.268941).epsilon(1e-6));

  const auto flat = softmax(std::vector<double>{1.0, 0.0}, 1e6);
  CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-5));

  CHECK_THROWS_AS(softmax(std::vector<double>{}, 1.0), UsageError);
  CHECK_THROWS_AS(softmax(std::vector<double>{1.0}, 0.0), UsageError);
}

TEST_CASE("softmax is a shift-invariant distribution") {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> scores(1 + uniform_index(rng, 6));
    for (double& s : scores) s = uniform_real(rng, -5, 5);
    const double tau = uniform_real(rng, 0.1, 5);
    const auto p = softmax(scores, tau);
    double total = 0.0;
    for (double x : p) {
      CHECK(x > 0.0);
      CHECK(x <= 1.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);

    auto shifted = scores;
    const double k = uniform_real(rng, -100, 100);
    for (double& s : shifted) s += k;
    const auto q = softmax(shifted, tau);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-12);
  }
}

TEST_CASE("softmax is monotone in one score") {
  const std::vector<double> base{0.2, 0.5, 0.1};
  auto raised = base;
  raised[0] += 0.3;
  CHECK(softmax(raised, 1.0)[0] > softmax(base, 1.0)[0]);
}

TEST_CASE("forced exploration of untried strategies") {
  auto b = fail_bandit();
  for (double p : b.selection_probabilities()) CHECK(p == doctest::Approx(0.2));

  for (auto s : {PromptStrategy::Fix, PromptStrategy::Simplify, PromptStrategy::Explore,
                 PromptStrategy::Refactor}) {
    b.record_reward(s, 1.0);
  }
  const auto probs = b.selection_probabilities();
  for (std::size_t i = 0; i < b.arms().size(); ++i) {
    CHECK(probs[i] == (b.arms()[i] == PromptStrategy::Improve ? 1.0 : 0.0));
  }
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(b.select(rng) == PromptStrategy::Improve);
}

TEST_CASE("equal stats select uniformly") {
  auto b = fail_bandit();
  for (auto s : b.arms()) b.record_reward(s, 0.5);
  for (double p : b.selection_probabilities()) CHECK(p == doctest::Approx(0.2));
}

TEST_CASE("selection is reproducible for a seed") {
  auto b = fail_bandit();
  for (auto s : b.arms()) b.record_reward(s, s == PromptStrategy::Fix ? 1.0 : 0.0);
  Rng r1(123), r2(123);
  for (int i = 0; i < 100; ++i) CHECK(b.select(r1) == b.select(r2));
}

TEST_CASE("selection frequencies match softmax") {
  const std::vector<PromptStrategy> arms{PromptStrategy::Fix, PromptStrategy::Explore};
  BanditState b(arms, 0.0, 1.0);
  b.record_reward(PromptStrategy::Fix, 1.0);
  b.record_reward(PromptStrategy::Explore, 0.0);
  Rng rng(2024);
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += b.select(rng) == PromptStrategy::Fix ? 1 : 0;
  CHECK(first / double(n) == doctest::Approx(0.7311).epsilon(0.0137));
}

TEST_CASE("select_among restricts the candidates") {
  auto b = BanditState(allowed_strategies(PopulationLabel::Success), 2.0, 1.0);
  Rng rng(5);
  const std::vector<PromptStrategy> no_fusion{PromptStrategy::Simplify, PromptStrategy::Improve};
  for (int i = 0; i < 100; ++i) {
    const auto s = b.select_among(no_fusion, rng);
    CHECK((s == PromptStrategy::Simplify || s == PromptStrategy::Improve));
  }
  CHECK_THROWS_AS(b.select_among(std::vector<PromptStrategy>{}, rng), UsageError);
  CHECK_THROWS_AS(b.select_among(std::vector<PromptStrategy>{PromptStrategy::Fix}, rng), UsageError);
}

TEST_CASE("snapshots round-trip") {
  auto b = fail_bandit(1.5, 0.7);
  b.record_reward(PromptStrategy::Fix, 1.0);
  b.record_reward(PromptStrategy::Refactor, 0.0);
  const auto snap = b.snapshot();
  CHECK(BanditState::from_snapshot(snap) == b);

  auto broken = snap;
  broken.total_pulls = 7;
  CHECK_THROWS_AS(BanditState::from_snapshot(broken), UsageError);
}

TEST_CASE("bandit construction checks") {
  CHECK_THROWS_AS(BanditState({}, 2.0, 1.0), UsageError);
  CHECK_THROWS_AS(fail_bandit(2.0, 0.0), ConfigError);
  CHECK_THROWS_AS(fail_bandit(-1.0, 1.0), ConfigError);
}
