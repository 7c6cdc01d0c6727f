#include <omp.h>

#include <algorithm>
#include <exception>

#include "rtlevo/batch.hpp"

namespace rtlevo {

std::vector<Individual> realize_batch_parallel(std::span<const PendingIndividual> batch,
                                               const EvalContext& ctx, int max_threads) {
  const auto n = static_cast<long>(batch.size());
  std::vector<Individual> out(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  // Tasks are dominated by LLM latency and tool subprocesses, not CPU, so the
  // thread count follows the batch size rather than the core count.
  const int threads =
      max_threads > 0 ? max_threads : static_cast<int>(std::clamp<long>(n, 1, 64));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = realize(batch[static_cast<std::size_t>(i)], ctx);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace rtlevo
