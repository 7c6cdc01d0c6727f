#pragma once

#include <span>
#include <vector>

#include "rtlevo/evaluation.hpp"

namespace rtlevo {

// An individual whose prompt is built but whose completion and evaluation
// are still pending. `draft` carries id, lineage and generation.
struct PendingIndividual {
  Individual draft;
  PromptBundle prompt;
};

enum class ExecutionMode { Serial, Parallel };

// Code stored for individuals whose response had no usable code block.
inline constexpr const char* kPlaceholderCode = "// no code block found in the model response";

// complete -> parse -> evaluate for one pending individual. Parse failures
// become simulation failures; ProviderError, ScriptError and
// EnvironmentError propagate.
Individual realize(const PendingIndividual& pending, const EvalContext& ctx);

// Reference implementation: one task after another, in index order.
std::vector<Individual> realize_batch_serial(std::span<const PendingIndividual> batch,
                                             const EvalContext& ctx);

// OpenMP fan-out; results are joined in index order, and the first failing
// index's exception is rethrown after every task finished. max_threads <= 0
// uses one thread per task (capped at 64).
std::vector<Individual> realize_batch_parallel(std::span<const PendingIndividual> batch,
                                               const EvalContext& ctx, int max_threads = 0);

// Parallel only when requested and the provider's answers are independent of
// call order; otherwise serial.
std::vector<Individual> realize_batch(std::span<const PendingIndividual> batch,
                                      const EvalContext& ctx, ExecutionMode mode,
                                      int max_threads = 0);

}  // namespace rtlevo
