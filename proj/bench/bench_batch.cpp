// Serial reference vs OpenMP fan-out for one offspring batch. Evaluation
// sleeps for a fixed latency to stand in for tool and model round trips.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "rtlevo/batch.hpp"
#include "rtlevo/rng.hpp"
#include "rtlevo/simulated_provider.hpp"

namespace {

using namespace rtlevo;

struct Fixture {
  ProblemSpec spec;
  SyntheticEvaluator evaluator;
  SimulatedDesigner designer{SimulatedDesignerConfig{}};
  PromptLibrary prompts = PromptLibrary::defaults();
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "rtlevo_bench";
  std::vector<PendingIndividual> batch;

  Fixture(int size, int latency_ms) : evaluator(config(latency_ms)) {
    spec.name = "top_module";
    spec.functional_description = "An 8-bit adder.";
    spec.reference_ppa = {1.0, 1.0, 1.0};
    std::filesystem::create_directories(scratch);
    for (int i = 0; i < size; ++i) {
      PendingIndividual p;
      p.draft.id = static_cast<IndividualId>(i);
      p.prompt = prompts.initial(spec);
      p.prompt.stream_seed = stream_seed(1, 0, static_cast<std::uint64_t>(i));
      batch.push_back(std::move(p));
    }
  }

  static SyntheticEvaluatorConfig config(int latency_ms) {
    SyntheticEvaluatorConfig c;
    c.simulated_latency_ms = latency_ms;
    return c;
  }

  EvalContext context() { return EvalContext{spec, {}, evaluator, designer, prompts, scratch}; }
};

void BM_BatchSerial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto ctx = f.context();
  for (auto _ : state) benchmark::DoNotOptimize(realize_batch_serial(f.batch, ctx));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto ctx = f.context();
  for (auto _ : state) benchmark::DoNotOptimize(realize_batch_parallel(f.batch, ctx));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// {batch size, latency ms}; latency 0 measures pure overhead.
#define BATCH_ARGS ->Args({10, 0})->Args({10, 5})->Args({32, 5})->Unit(benchmark::kMillisecond)->UseRealTime()
BENCHMARK(BM_BatchSerial) BATCH_ARGS;
BENCHMARK(BM_BatchParallel) BATCH_ARGS;

}  // namespace

BENCHMARK_MAIN();
