#include "rtlevo/evaluation.hpp"

#include <fstream>
#include <sstream>

#include "rtlevo/errors.hpp"
#include "rtlevo/rng.hpp"

namespace rtlevo {
namespace {

std::string tail(std::string_view s, std::size_t n) {
  if (s.size() <= n) return std::string(s);
  return std::string(s.substr(s.size() - n));
}

void write_text(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Owns one individual's scratch directory for the duration of an evaluation.
class ScratchDir {
 public:
  ScratchDir(const std::filesystem::path& root, IndividualId id, bool keep)
      : path_(root / ("ind_" + std::to_string(id))), keep_(keep) {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
    std::filesystem::create_directories(path_, ec);
    if (ec) throw EnvironmentError("cannot create scratch directory " + path_.string());
  }
  ~ScratchDir() {
    if (keep_) return;
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  bool keep_;
};

void save_artifacts(const std::filesystem::path& dir, const Individual& ind) {
  write_text(dir / "thought.txt", ind.thought);
  write_text(dir / "design.v", ind.code);
  if (ind.outcome) {
    write_text(dir / "sim.log", ind.outcome->sim_log);
    if (!ind.outcome->synth_log.empty()) write_text(dir / "synth.log", ind.outcome->synth_log);
  }
  if (ind.feedback) write_text(dir / "feedback.txt", *ind.feedback);
}

std::uint64_t feedback_seed(std::uint64_t seed, IndividualId id) {
  return stream_seed(seed, ~0ull, id);
}

Individual finish(Individual ind, EvalOutcome outcome, const EvalContext& ctx) {
  ind.fitness = fitness_of(outcome, ctx.spec.reference_ppa, ctx.weights);
  ind.outcome = std::move(outcome);
  ind.feedback = generate_feedback(ind, ctx.spec, ctx.provider, ctx.prompts,
                                   feedback_seed(ctx.seed, ind.id));
  return ind;
}

}  // namespace

std::string fallback_feedback(const Individual& ind, const ProblemSpec& spec) {
  std::ostringstream os;
  if (!ind.outcome || !ind.outcome->sim_passed) {
    os << "The design failed simulation. Review the log tail below and correct the behaviour.\n";
    if (ind.outcome) os << tail(ind.outcome->sim_log, 1000);
    return os.str();
  }
  os.precision(6);
  const auto& ref = spec.reference_ppa;
  if (ind.outcome->ppa) {
    const auto& p = *ind.outcome->ppa;
    os << "The design passed simulation. Power " << p.power << " vs reference " << ref.power
       << "; area " << p.area << " vs " << ref.area << "; effective clock period "
       << p.effective_clock_period << " ns vs " << ref.effective_clock_period
       << " ns. Reduce whichever metric exceeds the reference.";
  } else {
    os << "The design passed simulation but did not synthesize. Remove unsynthesizable "
          "constructs.\n"
       << tail(ind.outcome->synth_log, 1000);
  }
  return os.str();
}

std::string generate_feedback(const Individual& ind, const ProblemSpec& spec,
                              LlmProvider& provider, const PromptLibrary& prompts,
                              std::uint64_t stream_seed) {
  auto bundle = prompts.feedback_request(ind, spec);
  bundle.stream_seed = stream_seed;
  try {
    auto text = provider.complete(bundle).text;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return fallback_feedback(ind, spec);
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
  } catch (const ProviderError&) {
    return fallback_feedback(ind, spec);
  } catch (const ScriptError&) {
    return fallback_feedback(ind, spec);
  }
}

Individual evaluate(Individual ind, const EvalContext& ctx) {
  if (ind.code.empty()) throw UsageError("evaluate: individual " + std::to_string(ind.id) + " has no code");
  ScratchDir scratch(ctx.scratch_root, ind.id, ctx.keep_artifacts);
  auto outcome = ctx.evaluator.assess(ind.code, ctx.spec, scratch.path());
  ind = finish(std::move(ind), std::move(outcome), ctx);
  if (ctx.keep_artifacts) save_artifacts(scratch.path(), ind);
  return ind;
}

Individual evaluate_unparseable(Individual ind, const std::string& reason, const EvalContext& ctx) {
  EvalOutcome outcome;
  outcome.sim_passed = false;
  outcome.sim_log = "response parse error: " + reason + "\n";
  ind = finish(std::move(ind), std::move(outcome), ctx);
  if (ctx.keep_artifacts) {
    const auto dir = ctx.scratch_root / ("ind_" + std::to_string(ind.id));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!ec) save_artifacts(dir, ind);
  }
  return ind;
}

}  // namespace rtlevo
