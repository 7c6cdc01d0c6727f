#include "rtlevo/config.hpp"

#include <fstream>
#include <sstream>

#include "rtlevo/errors.hpp"

namespace rtlevo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

// A JSON object whose keys are consumed one by one; whatever is left over is
// reported as unknown.
class Section {
 public:
  Section(const json* node, std::string path, std::vector<std::string>& unknown)
      : node_(node), path_(std::move(path)), unknown_(unknown) {
    if (node_ && !node_->is_object()) {
      throw ConfigError(where() + " must be an object, got " + type_name(*node_));
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;
  ~Section() {
    if (!node_) return;
    for (const auto& [key, _] : node_->items()) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        unknown_.push_back(path_.empty() ? key : path_ + "." + key);
      }
    }
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  const json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.push_back(key);
    return &node_->at(key);
  }

  Section sub(const std::string& key) { return Section(raw(key), field(key), unknown_); }

  template <typename T>
  bool read(const std::string& key, T& out) {
    const json* v = raw(key);
    if (!v) return false;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::invalid_argument("boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw std::invalid_argument("integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_integer() && !v->is_number_unsigned()) {
            throw std::invalid_argument("non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("string");
      }
      out = v->get<T>();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key) + " must be a " + e.what() + ", got " + type_name(*v));
    }
    return true;
  }

  template <typename T>
  std::optional<T> opt(const std::string& key) {
    T v{};
    if (read(key, v)) return v;
    return std::nullopt;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json* node_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::vector<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string read_file(const fs::path& p, const std::string& field) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError(field + ": cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Inline text under `key` or a file under `key + "_file"`; at most one.
std::optional<std::string> text_or_file(Section& s, const std::string& key, const fs::path& base) {
  auto inline_text = s.opt<std::string>(key);
  auto file = s.opt<std::string>(key + "_file");
  if (inline_text && file) {
    throw ConfigError(s.field(key) + " and " + s.field(key + "_file") + " are mutually exclusive");
  }
  if (file) return read_file(resolve(base, *file), s.field(key + "_file"));
  return inline_text;
}

void read_ppa(Section& s, PpaMetrics& m) {
  s.read("power", m.power);
  s.read("area", m.area);
  s.read("effective_clock_period", m.effective_clock_period);
}

void read_range(Section& s, const std::string& key, double& lo, double& hi) {
  const json* v = s.raw(key);
  if (!v) return;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
    throw ConfigError(s.field(key) + " must be a [low, high] pair of numbers");
  }
  lo = (*v)[0].get<double>();
  hi = (*v)[1].get<double>();
}

template <typename E>
E read_enum(Section& s, const std::string& key, E fallback,
            std::initializer_list<std::pair<const char*, E>> names) {
  const auto text = s.opt<std::string>(key);
  if (!text) return fallback;
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (*text == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(s.field(key) + " must be one of {" + allowed + "}, got '" + *text + "'");
}

void parse_problem(Section s, RunConfig& cfg, const fs::path& base) {
  auto& p = cfg.problem;
  s.read("name", p.name);
  if (const auto kind = s.opt<std::string>("circuit_kind")) {
    const auto k = circuit_kind_from_string(*kind);
    if (!k) {
      throw ConfigError("problem.circuit_kind must be combinational or sequential, got '" + *kind + "'");
    }
    p.circuit_kind = *k;
  }
  if (auto d = text_or_file(s, "description", base)) p.functional_description = std::move(*d);
  if (auto t = text_or_file(s, "testbench", base)) p.testbench_source = std::move(*t);
  s.read("target_clock_period", p.target_clock_period);

  const bool has_ref = s.has("reference_ppa");
  auto ref_design = s.opt<std::string>("reference_design_file");
  if (has_ref == ref_design.has_value()) {
    throw ConfigError(
        "problem needs exactly one of reference_ppa and reference_design_file");
  }
  if (has_ref) {
    auto ref = s.sub("reference_ppa");
    read_ppa(ref, p.reference_ppa);
  } else {
    cfg.reference_design = resolve(base, *ref_design);
  }
}

void parse_evolution(Section s, RunConfig& cfg) {
  auto& e = cfg.evolution;
  s.read("population_size", e.population_size);
  s.read("offspring_count", e.offspring_count);
  s.read("max_generations", e.max_generations);
  s.read("elite_per_metric", e.elite_per_metric);
  e.weights = FitnessWeights::for_circuit(cfg.problem.circuit_kind);
  if (s.has("weights")) {
    auto w = s.sub("weights");
    w.read("alpha", e.weights.alpha);
    w.read("beta", e.weights.beta);
    w.read("gamma", e.weights.gamma);
  }
  s.read("reward", e.reward);
  s.read("exploration_c", e.exploration_c);
  s.read("temperature", e.temperature);
  s.read("rng_seed", e.rng_seed);
  e.execution = read_enum(s, "execution", e.execution,
                          {{"parallel", ExecutionMode::Parallel}, {"serial", ExecutionMode::Serial}});
  s.read("max_threads", e.max_threads);
}

void parse_provider(Section s, RunConfig& cfg, const fs::path& base) {
  cfg.provider_kind = read_enum(s, "kind", ProviderKind::Http,
                                {{"http", ProviderKind::Http},
                                 {"scripted", ProviderKind::Scripted},
                                 {"simulated", ProviderKind::Simulated}});
  switch (cfg.provider_kind) {
    case ProviderKind::Http: {
      auto& h = cfg.http;
      s.read("endpoint_url", h.endpoint_url);
      s.read("model_name", h.model_name);
      s.read("api_key_env_var", h.api_key_env_var);
      s.read("temperature", h.temperature);
      s.read("top_p", h.top_p);
      h.feedback_temperature = s.opt<double>("feedback_temperature");
      h.feedback_top_p = s.opt<double>("feedback_top_p");
      s.read("max_retries", h.max_retries);
      s.read("request_timeout_s", h.request_timeout_s);
      s.read("max_parallel_requests", h.max_parallel_requests);
      s.read("backoff_base_s", h.backoff_base_s);
      s.read("backoff_factor", h.backoff_factor);
      break;
    }
    case ProviderKind::Scripted: {
      const auto script = s.opt<std::string>("script");
      if (!script) throw ConfigError("provider.script is required for the scripted provider");
      cfg.script_path = resolve(base, *script);
      break;
    }
    case ProviderKind::Simulated: {
      auto& m = cfg.simulated;
      s.read("initial_fail_probability", m.initial_fail_probability);
      s.read("fix_success_probability", m.fix_success_probability);
      s.read("repair_probability", m.repair_probability);
      s.read("keep_correct_probability", m.keep_correct_probability);
      s.read("synth_fail_probability", m.synth_fail_probability);
      if (s.has("reference")) {
        auto r = s.sub("reference");
        read_ppa(r, m.reference);
        cfg.simulated_reference_explicit = true;
      }
      read_range(s, "fresh_range", m.fresh_low, m.fresh_high);
      read_range(s, "improve_range", m.improve_low, m.improve_high);
      read_range(s, "simplify_range", m.simplify_low, m.simplify_high);
      read_range(s, "refactor_range", m.refactor_low, m.refactor_high);
      read_range(s, "fusion_range", m.fusion_low, m.fusion_high);
      cfg.simulated_seed_explicit = s.read("seed", m.seed);
      break;
    }
  }
}

void parse_evaluator(Section s, RunConfig& cfg, const fs::path& base) {
  cfg.evaluator_kind = read_enum(s, "kind", EvaluatorKind::Toolchain,
                                 {{"toolchain", EvaluatorKind::Toolchain},
                                  {"synthetic", EvaluatorKind::Synthetic}});
  if (cfg.evaluator_kind == EvaluatorKind::Toolchain) {
    auto& t = cfg.toolchain;
    s.read("simulator_command", t.simulator_command);
    s.read("sim_run_command", t.sim_run_command);
    s.read("sim_pass_pattern", t.sim_pass_pattern);
    s.read("synthesizer_command", t.synthesizer_command);
    if (auto script = text_or_file(s, "synth_script", base)) t.synth_script = std::move(*script);
    s.read("sta_command", t.sta_command);
    if (auto script = text_or_file(s, "sta_script", base)) t.sta_script = std::move(*script);
    if (auto lib = s.opt<std::string>("liberty_path")) t.liberty_path = resolve(base, *lib);
    t.clock_period = cfg.problem.target_clock_period;
    s.read("clock_period", t.clock_period);
    s.read("per_stage_timeout_s", t.per_stage_timeout_s);
    if (auto w = s.opt<std::string>("workdir_root")) t.workdir_root = resolve(base, *w);
    s.read("top_module", t.top_module);
    s.read("post_synth_check", t.post_synth_check);
    s.read("post_synth_sim_command", t.post_synth_sim_command);
    s.read("post_synth_run_command", t.post_synth_run_command);
    if (auto cm = s.opt<std::string>("cell_models")) t.cell_models = resolve(base, *cm);
    return;
  }
  auto& y = cfg.synthetic;
  using Cfg = SyntheticEvaluatorConfig;
  y.pass_rule = read_enum(s, "pass_rule", y.pass_rule,
                          {{"annotation", Cfg::PassRule::Annotation},
                           {"always", Cfg::PassRule::Always},
                           {"never", Cfg::PassRule::Never},
                           {"hash", Cfg::PassRule::Hash}});
  s.read("pass_probability", y.pass_probability);
  y.ppa_rule = read_enum(s, "ppa_rule", y.ppa_rule,
                         {{"annotation", Cfg::PpaRule::Annotation}, {"hash", Cfg::PpaRule::Hash}});
  if (s.has("hash_base")) {
    auto b = s.sub("hash_base");
    read_ppa(b, y.hash_base);
  }
  s.read("hash_spread", y.hash_spread);
  cfg.synthetic_seed_explicit = s.read("seed", y.seed);
  s.read("post_synth_check", y.post_synth_check);
  s.read("simulated_latency_ms", y.simulated_latency_ms);
}

const char* pass_rule_name(SyntheticEvaluatorConfig::PassRule r) {
  switch (r) {
    case SyntheticEvaluatorConfig::PassRule::Annotation: return "annotation";
    case SyntheticEvaluatorConfig::PassRule::Always: return "always";
    case SyntheticEvaluatorConfig::PassRule::Never: return "never";
    case SyntheticEvaluatorConfig::PassRule::Hash: return "hash";
  }
  return "annotation";
}

json ppa_json(const PpaMetrics& m) {
  return {{"power", m.power}, {"area", m.area}, {"effective_clock_period", m.effective_clock_period}};
}

}  // namespace

std::string_view to_string(ProviderKind k) noexcept {
  switch (k) {
    case ProviderKind::Http: return "http";
    case ProviderKind::Scripted: return "scripted";
    case ProviderKind::Simulated: return "simulated";
  }
  return "http";
}

std::string_view to_string(EvaluatorKind k) noexcept {
  return k == EvaluatorKind::Toolchain ? "toolchain" : "synthetic";
}

void RunConfig::set_seed(std::uint64_t seed) {
  evolution.rng_seed = seed;
  if (!simulated_seed_explicit) simulated.seed = seed;
  if (!synthetic_seed_explicit) synthetic.seed = seed;
}

void RunConfig::set_reference_ppa(const PpaMetrics& ref) {
  problem.reference_ppa = ref;
  if (!simulated_reference_explicit) simulated.reference = ref;
}

void RunConfig::validate() const {
  ProblemSpec p = problem;
  // A reference measured at run time is validated once it exists.
  if (reference_design) p.reference_ppa = PpaMetrics{1.0, 1.0, 1.0};
  p.validate();
  evolution.validate();
  switch (provider_kind) {
    case ProviderKind::Http: http.validate(); break;
    case ProviderKind::Scripted:
      if (script_path.empty()) throw ConfigError("provider.script must be set");
      break;
    case ProviderKind::Simulated: {
      auto sim = simulated;
      if (reference_design && !simulated_reference_explicit) sim.reference = p.reference_ppa;
      sim.validate();
      break;
    }
  }
  if (evaluator_kind == EvaluatorKind::Toolchain) {
    if (problem.testbench_source.empty()) {
      throw ConfigError("problem.testbench must be non-empty for the toolchain evaluator");
    }
    toolchain.validate();
  } else {
    synthetic.validate();
  }
  if (feedback.log_tail_chars == 0) throw ConfigError("feedback.log_tail_chars must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  RunConfig cfg;
  std::vector<std::string> unknown;
  {
    Section root(&doc, "", unknown);
    // problem first: circuit_kind and the clock feed other sections' defaults.
    if (!root.has("problem")) throw ConfigError("problem section is required");
    parse_problem(root.sub("problem"), cfg, base_dir);
    parse_evolution(root.sub("evolution"), cfg);
    parse_provider(root.sub("provider"), cfg, base_dir);
    parse_evaluator(root.sub("evaluator"), cfg, base_dir);
    {
      auto prompts = root.sub("prompts");
      if (auto dir = prompts.opt<std::string>("template_dir")) {
        cfg.template_dir = resolve(base_dir, *dir);
      }
      prompts.read("include_testbench", cfg.include_testbench);
    }
    {
      auto fb = root.sub("feedback");
      fb.read("log_tail_chars", cfg.feedback.log_tail_chars);
    }
    if (auto out = root.opt<std::string>("output_dir")) cfg.output_dir = resolve(base_dir, *out);
    else cfg.output_dir = resolve(base_dir, cfg.output_dir.string());
    root.read("keep_artifacts", cfg.keep_artifacts);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }
  if (!cfg.simulated_seed_explicit) cfg.simulated.seed = cfg.evolution.rng_seed;
  if (!cfg.synthetic_seed_explicit) cfg.synthetic.seed = cfg.evolution.rng_seed;
  if (!cfg.simulated_reference_explicit) cfg.simulated.reference = cfg.problem.reference_ppa;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto abs = fs::absolute(path);
  auto cfg = parse_config(doc, abs.parent_path());
  cfg.config_path = abs;
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  const auto& p = cfg.problem;
  j["problem"] = {{"name", p.name},
                  {"circuit_kind", to_string(p.circuit_kind)},
                  {"description", p.functional_description},
                  {"testbench", p.testbench_source},
                  {"target_clock_period", p.target_clock_period}};
  if (cfg.reference_design) {
    j["problem"]["reference_design_file"] = cfg.reference_design->string();
  } else {
    j["problem"]["reference_ppa"] = ppa_json(p.reference_ppa);
  }

  const auto& e = cfg.evolution;
  j["evolution"] = {{"population_size", e.population_size},
                    {"offspring_count", e.offspring_count},
                    {"max_generations", e.max_generations},
                    {"elite_per_metric", e.elite_per_metric},
                    {"weights", {{"alpha", e.weights.alpha}, {"beta", e.weights.beta}, {"gamma", e.weights.gamma}}},
                    {"reward", e.reward},
                    {"exploration_c", e.exploration_c},
                    {"temperature", e.temperature},
                    {"rng_seed", e.rng_seed},
                    {"execution", e.execution == ExecutionMode::Parallel ? "parallel" : "serial"},
                    {"max_threads", e.max_threads}};

  json prov = {{"kind", to_string(cfg.provider_kind)}};
  switch (cfg.provider_kind) {
    case ProviderKind::Http: {
      const auto& h = cfg.http;
      prov.update({{"endpoint_url", h.endpoint_url},
                   {"model_name", h.model_name},
                   {"api_key_env_var", h.api_key_env_var},
                   {"temperature", h.temperature},
                   {"top_p", h.top_p},
                   {"max_retries", h.max_retries},
                   {"request_timeout_s", h.request_timeout_s},
                   {"max_parallel_requests", h.max_parallel_requests},
                   {"backoff_base_s", h.backoff_base_s},
                   {"backoff_factor", h.backoff_factor}});
      if (h.feedback_temperature) prov["feedback_temperature"] = *h.feedback_temperature;
      if (h.feedback_top_p) prov["feedback_top_p"] = *h.feedback_top_p;
      break;
    }
    case ProviderKind::Scripted: prov["script"] = cfg.script_path.string(); break;
    case ProviderKind::Simulated: {
      const auto& m = cfg.simulated;
      prov.update({{"initial_fail_probability", m.initial_fail_probability},
                   {"fix_success_probability", m.fix_success_probability},
                   {"repair_probability", m.repair_probability},
                   {"keep_correct_probability", m.keep_correct_probability},
                   {"synth_fail_probability", m.synth_fail_probability},
                   {"reference", ppa_json(m.reference)},
                   {"fresh_range", {m.fresh_low, m.fresh_high}},
                   {"improve_range", {m.improve_low, m.improve_high}},
                   {"simplify_range", {m.simplify_low, m.simplify_high}},
                   {"refactor_range", {m.refactor_low, m.refactor_high}},
                   {"fusion_range", {m.fusion_low, m.fusion_high}},
                   {"seed", m.seed}});
      break;
    }
  }
  j["provider"] = prov;

  json ev = {{"kind", to_string(cfg.evaluator_kind)}};
  if (cfg.evaluator_kind == EvaluatorKind::Toolchain) {
    const auto& t = cfg.toolchain;
    ev.update({{"simulator_command", t.simulator_command},
               {"sim_run_command", t.sim_run_command},
               {"sim_pass_pattern", t.sim_pass_pattern},
               {"synthesizer_command", t.synthesizer_command},
               {"synth_script", t.synth_script},
               {"sta_command", t.sta_command},
               {"sta_script", t.sta_script},
               {"liberty_path", t.liberty_path.string()},
               {"clock_period", t.clock_period},
               {"per_stage_timeout_s", t.per_stage_timeout_s},
               {"workdir_root", t.workdir_root.string()},
               {"top_module", t.top_module},
               {"post_synth_check", t.post_synth_check},
               {"post_synth_sim_command", t.post_synth_sim_command},
               {"post_synth_run_command", t.post_synth_run_command},
               {"cell_models", t.cell_models.string()}});
  } else {
    const auto& y = cfg.synthetic;
    ev.update({{"pass_rule", pass_rule_name(y.pass_rule)},
               {"pass_probability", y.pass_probability},
               {"ppa_rule", y.ppa_rule == SyntheticEvaluatorConfig::PpaRule::Hash ? "hash" : "annotation"},
               {"hash_base", ppa_json(y.hash_base)},
               {"hash_spread", y.hash_spread},
               {"seed", y.seed},
               {"post_synth_check", y.post_synth_check},
               {"simulated_latency_ms", y.simulated_latency_ms}});
  }
  j["evaluator"] = ev;

  j["prompts"] = {{"include_testbench", cfg.include_testbench}};
  if (cfg.template_dir) j["prompts"]["template_dir"] = cfg.template_dir->string();
  j["feedback"] = {{"log_tail_chars", cfg.feedback.log_tail_chars}};
  j["output_dir"] = cfg.output_dir.string();
  j["keep_artifacts"] = cfg.keep_artifacts;
  return j;
}

}  // namespace rtlevo
