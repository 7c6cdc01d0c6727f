#include "rtlevo/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtlevo/errors.hpp"

namespace rtlevo {

double ucb_score(const StrategyStats& s, std::uint64_t total_pulls, double c) noexcept {
  if (s.pull_count == 0 || total_pulls == 0) return kUntriedScore;
  const double bonus = std::sqrt(std::log(static_cast<double>(total_pulls)) /
                                 static_cast<double>(s.pull_count));
  return s.q_value + c * bonus;
}

std::vector<double> softmax(std::span<const double> scores, double temperature) {
  if (scores.empty()) throw UsageError("softmax: empty score list");
  if (!(temperature > 0.0)) throw UsageError("softmax: temperature must be > 0");
  const double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - peak) / temperature);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

BanditState::BanditState(std::vector<PromptStrategy> arms, double exploration_c, double temperature)
    : arms_(std::move(arms)), stats_(arms_.size()), c_(exploration_c), tau_(temperature) {
  if (arms_.empty()) throw UsageError("bandit needs at least one strategy");
  if (!(tau_ > 0.0)) throw ConfigError("bandit temperature must be > 0");
  if (!(c_ >= 0.0)) throw ConfigError("bandit exploration parameter must be >= 0");
}

bool BanditState::contains(PromptStrategy s) const noexcept {
  return std::find(arms_.begin(), arms_.end(), s) != arms_.end();
}

std::size_t BanditState::index_of(PromptStrategy s) const {
  const auto it = std::find(arms_.begin(), arms_.end(), s);
  if (it == arms_.end()) {
    throw UsageError("strategy " + std::string(to_string(s)) + " is not in this bandit's set");
  }
  return static_cast<std::size_t>(it - arms_.begin());
}

const StrategyStats& BanditState::stats(PromptStrategy s) const { return stats_[index_of(s)]; }

void BanditState::record_reward(PromptStrategy s, double reward) {
  auto& st = stats_[index_of(s)];
  st.pull_count += 1;
  st.q_value += (reward - st.q_value) / static_cast<double>(st.pull_count);
  total_pulls_ += 1;
}

BanditSnapshot BanditState::snapshot() const {
  BanditSnapshot snap;
  for (std::size_t i = 0; i < arms_.size(); ++i) snap.arms.push_back({arms_[i], stats_[i]});
  snap.total_pulls = total_pulls_;
  snap.exploration_c = c_;
  snap.temperature = tau_;
  return snap;
}

BanditState BanditState::from_snapshot(const BanditSnapshot& snap) {
  std::vector<PromptStrategy> arms;
  for (const auto& a : snap.arms) arms.push_back(a.strategy);
  BanditState state(std::move(arms), snap.exploration_c, snap.temperature);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < snap.arms.size(); ++i) {
    state.stats_[i] = snap.arms[i].stats;
    total += snap.arms[i].stats.pull_count;
  }
  if (total != snap.total_pulls) throw UsageError("bandit snapshot: total_pulls != sum of pulls");
  state.total_pulls_ = total;
  return state;
}

std::vector<double> BanditState::selection_probabilities(
    std::span<const PromptStrategy> candidates) const {
  if (candidates.empty()) throw UsageError("strategy selection over an empty set");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  std::size_t untried = 0;
  for (auto s : candidates) {
    const auto& st = stats_[index_of(s)];
    scores.push_back(ucb_score(st, total_pulls_, c_));
    if (st.pull_count == 0) ++untried;
  }
  if (untried > 0) {
    // Forced exploration: every strategy is tried once before softmax engages.
    std::vector<double> probs(candidates.size(), 0.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (scores[i] == kUntriedScore) probs[i] = 1.0 / static_cast<double>(untried);
    }
    return probs;
  }
  return softmax(scores, tau_);
}

PromptStrategy BanditState::select_among(std::span<const PromptStrategy> candidates,
                                         Rng& rng) const {
  const auto probs = selection_probabilities(candidates);
  return candidates[sample_index(probs, rng)];
}

}  // namespace rtlevo
