#include "rtlevo/batch.hpp"
#include "rtlevo/errors.hpp"

namespace rtlevo {

Individual realize(const PendingIndividual& pending, const EvalContext& ctx) {
  const auto completion = ctx.provider.complete(pending.prompt);
  Individual ind = pending.draft;
  try {
    auto parsed = parse_llm_response(completion.text);
    ind.thought = std::move(parsed.thought);
    ind.code = std::move(parsed.code);
  } catch (const ParseError& e) {
    ind.thought = completion.text;
    ind.code = kPlaceholderCode;
    return evaluate_unparseable(std::move(ind), std::string(to_string(e.kind())), ctx);
  }
  return evaluate(std::move(ind), ctx);
}

std::vector<Individual> realize_batch_serial(std::span<const PendingIndividual> batch,
                                             const EvalContext& ctx) {
  std::vector<Individual> out;
  out.reserve(batch.size());
  for (const auto& p : batch) out.push_back(realize(p, ctx));
  return out;
}

std::vector<Individual> realize_batch(std::span<const PendingIndividual> batch,
                                      const EvalContext& ctx, ExecutionMode mode,
                                      int max_threads) {
  if (mode == ExecutionMode::Parallel && ctx.provider.order_independent() && batch.size() > 1) {
    return realize_batch_parallel(batch, ctx, max_threads);
  }
  return realize_batch_serial(batch, ctx);
}

}  // namespace rtlevo
