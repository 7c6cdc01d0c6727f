#include "rtlevo/run.hpp"

#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rtlevo/errors.hpp"
#include "rtlevo/json_io.hpp"
#include "rtlevo/report.hpp"

namespace rtlevo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw EnvironmentError("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Temporary scratch root removed on destruction; a kept root is left alone.
class ScratchRoot {
 public:
  explicit ScratchRoot(const RunConfig& cfg) {
    if (cfg.keep_artifacts) {
      path_ = cfg.output_dir / "artifacts";
      std::error_code ec;
      fs::remove_all(path_, ec);
      fs::create_directories(path_);
      return;
    }
    fs::path base = cfg.evaluator_kind == EvaluatorKind::Toolchain && !cfg.toolchain.workdir_root.empty()
                        ? cfg.toolchain.workdir_root
                        : fs::temp_directory_path();
    fs::create_directories(base);
    std::string pattern = (base / "rtlevo-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) {
      throw EnvironmentError("cannot create a scratch directory under " + base.string());
    }
    path_ = pattern;
    owned_ = true;
  }
  ~ScratchRoot() {
    if (!owned_) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchRoot(const ScratchRoot&) = delete;
  ScratchRoot& operator=(const ScratchRoot&) = delete;

  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

// Stands in for a provider when nothing may be called.
class NoCallProvider final : public LlmProvider {
 public:
  CompletionResult complete(const PromptBundle&) override {
    throw UsageError("dry run: the provider must not be called");
  }
  std::string describe() const override { return "none"; }
};

}  // namespace

void apply_overrides(RunConfig& cfg, const RunOverrides& o) {
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.output_dir) cfg.output_dir = fs::absolute(*o.output_dir);
  if (o.keep_artifacts) cfg.keep_artifacts = true;
  if (o.generations) cfg.evolution.max_generations = *o.generations;
  cfg.validate();
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& cfg) {
  if (cfg.evaluator_kind == EvaluatorKind::Toolchain) {
    return std::make_unique<ToolchainEvaluator>(cfg.toolchain);
  }
  return std::make_unique<SyntheticEvaluator>(cfg.synthetic);
}

std::unique_ptr<LlmProvider> make_provider(const RunConfig& cfg) {
  switch (cfg.provider_kind) {
    case ProviderKind::Http: return std::make_unique<HttpChatProvider>(cfg.http);
    case ProviderKind::Scripted: return ScriptedProvider::from_file(cfg.script_path);
    case ProviderKind::Simulated: return std::make_unique<SimulatedDesigner>(cfg.simulated);
  }
  throw UsageError("unknown provider kind");
}

PromptLibrary make_prompts(const RunConfig& cfg) {
  auto lib = cfg.template_dir ? PromptLibrary::load_dir(*cfg.template_dir) : PromptLibrary::defaults();
  lib.include_testbench = cfg.include_testbench;
  lib.feedback = cfg.feedback;
  return lib;
}

PpaMetrics cmd_ref_ppa(const fs::path& design, const RunConfig& cfg) {
  const auto evaluator = make_evaluator(cfg);
  evaluator->precheck();
  const auto code = read_text(design);
  RunConfig scratch_cfg = cfg;
  scratch_cfg.keep_artifacts = false;
  ScratchRoot scratch(scratch_cfg);
  const auto ppa = evaluator->reference_ppa(code, cfg.problem, scratch.path());
  if (!(ppa.power > 0.0) || !(ppa.area > 0.0) || !(ppa.effective_clock_period > 0.0)) {
    throw Error("reference design " + design.string() +
                " produced non-positive PPA; the problem is not eligible for PPA comparison");
  }
  return ppa;
}

int cmd_dry_run(RunConfig cfg, std::ostream& out) {
  // The reference only scales fitness, so a placeholder suffices here.
  if (cfg.reference_design) cfg.set_reference_ppa({1.0, 1.0, 1.0});
  const auto evaluator = make_evaluator(cfg);
  const auto prompts = make_prompts(cfg);
  NoCallProvider provider;
  EvolutionEngine engine(cfg.problem, cfg.evolution, provider, *evaluator, prompts, {});
  const auto requests = engine.initial_requests();

  fs::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / "dry_run_prompts.jsonl";
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw EnvironmentError("cannot write " + path.string());
  for (const auto& r : requests) {
    file << json{{"id", r.draft.id},
                 {"purpose", to_string(r.prompt.purpose)},
                 {"stream_seed", r.prompt.stream_seed},
                 {"system", r.prompt.system_text},
                 {"user", r.prompt.user_text}}
                .dump()
         << '\n';
  }
  out << requests.size() << " generation-0 requests written to " << path.string() << "\n";
  if (!requests.empty()) {
    out << "\n--- system ---\n" << requests.front().prompt.system_text
        << "\n--- user ---\n" << requests.front().prompt.user_text << "\n";
  }
  return kExitFound;
}

int cmd_run(RunConfig cfg, std::ostream& log) {
  const auto started = Clock::now();
  json meta;
  fs::path meta_path;
  try {
    fs::create_directories(cfg.output_dir);
    meta_path = cfg.output_dir / "run.json";
    for (const char* stale : {"generations.jsonl", "report.json", "transcripts.jsonl"}) {
      std::error_code ec;
      fs::remove(cfg.output_dir / stale, ec);
    }

    auto evaluator = make_evaluator(cfg);
    evaluator->precheck();
    if (cfg.reference_design) {
      log << "measuring reference PPA from " << cfg.reference_design->string() << "\n";
      cfg.set_reference_ppa(cmd_ref_ppa(*cfg.reference_design, cfg));
    }
    auto inner = make_provider(cfg);
    const auto prompts = make_prompts(cfg);

    write_json(cfg.output_dir / "config.json", config_to_json(cfg));
    meta = {{"schema_version", kSchemaVersion},
            {"status", "running"},
            {"problem", cfg.problem.name},
            {"provider", inner->describe()},
            {"evaluator", evaluator->describe()},
            {"rng_seed", cfg.evolution.rng_seed},
            {"max_generations", cfg.evolution.max_generations},
            {"reference_ppa", cfg.problem.reference_ppa}};
    write_json(meta_path, meta);

    TranscriptLog transcripts(cfg.output_dir / "transcripts.jsonl");
    if (auto* http = dynamic_cast<HttpChatProvider*>(inner.get())) transcripts.add_secret(http->api_key());
    RecordingProvider provider(*inner, transcripts);

    std::ofstream gens(cfg.output_dir / "generations.jsonl", std::ios::trunc);
    if (!gens) throw EnvironmentError("cannot write generations.jsonl");

    ScratchRoot scratch(cfg);
    EvolutionEngine engine(cfg.problem, cfg.evolution, provider, *evaluator, prompts,
                           {scratch.path(), cfg.keep_artifacts});

    json gen_seconds = json::array();
    auto gen_start = Clock::now();
    const auto result = engine.run([&](const GenerationRecord& rec) {
      gens << record_to_line(rec) << '\n';
      gens.flush();
      gen_seconds.push_back(seconds_since(gen_start));
      gen_start = Clock::now();
      log << "generation " << rec.generation_index << ": fail " << rec.fail_count << ", success "
          << rec.success_count << ", best fitness " << real_to_json(rec.best_fitness).dump()
          << "\n";
      for (const auto& note : rec.notes) log << "  note: " << note << "\n";
    });
    gens.close();

    const auto run = load_run(cfg.output_dir);
    write_json(cfg.output_dir / "report.json", report_json(run));

    meta["status"] = "completed";
    meta["found_correct"] = result.found_correct;
    meta["best_id"] = result.best.id;
    meta["wall_clock_s"] = seconds_since(started);
    meta["generation_wall_clock_s"] = gen_seconds;
    write_json(meta_path, meta);

    if (!result.found_correct) {
      log << "no functionally correct design found\n";
      return kExitNotFound;
    }
    log << "best individual " << result.best.id << " with fitness "
        << real_to_json(result.best.fitness_or_worst()).dump() << "\n";
    return kExitFound;
  } catch (const std::exception& e) {
    log << "run aborted: " << e.what() << "\n";
    if (!meta_path.empty() && !meta.is_null()) {
      meta["status"] = "aborted";
      meta["error"] = e.what();
      meta["wall_clock_s"] = seconds_since(started);
      try {
        write_json(meta_path, meta);
      } catch (const std::exception&) {
      }
    }
    return kExitAbort;
  }
}

}  // namespace rtlevo
