#include "rtlevo/fitness.hpp"

#include <algorithm>
#include <cmath>

#include "rtlevo/errors.hpp"

namespace rtlevo {

FitnessWeights FitnessWeights::for_circuit(CircuitKind kind) noexcept {
  if (kind == CircuitKind::Sequential) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return {0.5, 0.5, 0.0};
}

void FitnessWeights::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("fitness weights must be finite and >= 0");
    }
  }
  if (!(alpha + beta + gamma > 0.0)) throw ConfigError("fitness weights must not all be zero");
}

double effective_period(double target_period, double worst_slack, double floor) noexcept {
  return std::max(target_period - worst_slack, floor);
}

double compute_fitness(const PpaMetrics& gen, const PpaMetrics& ref, const FitnessWeights& w) {
  if (!(ref.power > 0.0)) throw ConfigError("reference power must be > 0");
  if (!(ref.area > 0.0)) throw ConfigError("reference area must be > 0");
  if (!(ref.effective_clock_period > 0.0)) {
    throw ConfigError("reference effective clock period must be > 0");
  }
  const double power_term = (ref.power - gen.power) / ref.power;
  const double area_term = (ref.area - gen.area) / ref.area;
  const double timing_term =
      (ref.effective_clock_period - gen.effective_clock_period) / ref.effective_clock_period;
  return w.alpha * power_term + w.beta * area_term + w.gamma * timing_term;
}

double fitness_of(const EvalOutcome& outcome, const PpaMetrics& ref, const FitnessWeights& w) {
  if (!outcome.sim_passed) return kNegInfFitness;
  if (outcome.synth_succeeded && outcome.ppa) return compute_fitness(*outcome.ppa, ref, w);
  return kSynthFailFitness;
}

}  // namespace rtlevo
