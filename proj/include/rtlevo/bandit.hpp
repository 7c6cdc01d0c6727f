#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rtlevo/rng.hpp"
#include "rtlevo/types.hpp"

namespace rtlevo {

struct StrategyStats {
  double q_value = 0.0;
  std::uint64_t pull_count = 0;

  bool operator==(const StrategyStats&) const = default;
};

// Score of a strategy that has never been pulled. Compares greater than every
// finite UCB score.
inline constexpr double kUntriedScore = std::numeric_limits<double>::infinity();

// Q + c * sqrt(ln T / k); kUntriedScore when k == 0 or T == 0.
double ucb_score(const StrategyStats& s, std::uint64_t total_pulls, double c) noexcept;

// Max-subtracted softmax. Throws UsageError for empty input or temperature <= 0.
std::vector<double> softmax(std::span<const double> scores, double temperature);

struct BanditSnapshot {
  struct Arm {
    PromptStrategy strategy = PromptStrategy::Fix;
    StrategyStats stats;
    bool operator==(const Arm&) const = default;
  };
  std::vector<Arm> arms;
  std::uint64_t total_pulls = 0;
  double exploration_c = 0.0;
  double temperature = 1.0;

  bool operator==(const BanditSnapshot&) const = default;
};

// Per-population UCB + softmax operator selector.
class BanditState {
 public:
  BanditState(std::vector<PromptStrategy> arms, double exploration_c, double temperature);

  const std::vector<PromptStrategy>& arms() const noexcept { return arms_; }
  const StrategyStats& stats(PromptStrategy s) const;
  std::uint64_t total_pulls() const noexcept { return total_pulls_; }
  double exploration_c() const noexcept { return c_; }
  double temperature() const noexcept { return tau_; }
  bool contains(PromptStrategy s) const noexcept;

  // Incremental mean update. Throws UsageError for a strategy outside the set.
  void record_reward(PromptStrategy s, double reward);

  // Probabilities that select() would use over `candidates` (defaults to all
  // arms). Untried candidates, if any, share the mass uniformly.
  std::vector<double> selection_probabilities(std::span<const PromptStrategy> candidates) const;
  std::vector<double> selection_probabilities() const { return selection_probabilities(arms_); }

  PromptStrategy select(Rng& rng) const { return select_among(arms_, rng); }
  // Throws UsageError when `candidates` is empty or contains unknown arms.
  PromptStrategy select_among(std::span<const PromptStrategy> candidates, Rng& rng) const;

  BanditSnapshot snapshot() const;
  // Throws UsageError for an empty or inconsistent snapshot.
  static BanditState from_snapshot(const BanditSnapshot& snap);

  bool operator==(const BanditState&) const = default;

 private:
  std::size_t index_of(PromptStrategy s) const;

  std::vector<PromptStrategy> arms_;
  std::vector<StrategyStats> stats_;
  std::uint64_t total_pulls_ = 0;
  double c_;
  double tau_;
};

inline PromptStrategy select_strategy(const BanditState& state, Rng& rng) {
  return state.select(rng);
}

}  // namespace rtlevo
