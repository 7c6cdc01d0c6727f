#pragma once

#include "rtlevo/types.hpp"

namespace rtlevo {

struct FitnessWeights {
  double alpha = 0.5;  // power
  double beta = 0.5;   // area
  double gamma = 0.0;  // timing

  // (1/2, 1/2, 0) for combinational, (1/3, 1/3, 1/3) for sequential.
  static FitnessWeights for_circuit(CircuitKind kind) noexcept;

  void validate() const;

  bool operator==(const FitnessWeights&) const = default;
};

// Fitness for designs that simulate correctly but do not synthesize: finite so
// they stay in the Success population, far below any synthesizable design.
inline constexpr double kSynthFailFitness = -1e9;

inline constexpr double kMinEffectivePeriod = 1e-9;

// Achieved-period estimate at a fixed synthesis clock: target - worst_slack,
// clamped below at `floor`.
double effective_period(double target_period, double worst_slack,
                        double floor = kMinEffectivePeriod) noexcept;

// Weighted relative PPA improvement over the reference. Higher is better.
// Throws ConfigError when any reference metric is not strictly positive.
double compute_fitness(const PpaMetrics& gen, const PpaMetrics& ref, const FitnessWeights& w);

// -inf for simulation failures, kSynthFailFitness when synthesis did not
// produce PPA, compute_fitness otherwise.
double fitness_of(const EvalOutcome& outcome, const PpaMetrics& ref, const FitnessWeights& w);

}  // namespace rtlevo
