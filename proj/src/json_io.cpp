#include "rtlevo/json_io.hpp"

#include <cmath>
#include <limits>

#include "rtlevo/errors.hpp"

namespace rtlevo {

namespace {

template <typename E>
E enum_from(const Json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
  const auto text = j.get<std::string>();
  const auto v = parse(text);
  if (!v) throw Json::other_error::create(501, std::string("unknown ") + what + " '" + text + "'", &j);
  return *v;
}

PromptStrategy strategy_of(const Json& j) { return enum_from(j, strategy_from_string, "strategy"); }
PopulationLabel label_of(const Json& j) { return enum_from(j, label_from_string, "label"); }

}  // namespace

Json real_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  return x;
}

double real_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Json::other_error::create(501, "expected a number, got '" + s + "'", &j);
  }
  return j.get<double>();
}

void to_json(Json& j, const PpaMetrics& m) {
  j = Json{{"power", m.power}, {"area", m.area}, {"effective_clock_period", m.effective_clock_period}};
}

void from_json(const Json& j, PpaMetrics& m) {
  m.power = j.at("power").get<double>();
  m.area = j.at("area").get<double>();
  m.effective_clock_period = j.at("effective_clock_period").get<double>();
}

void to_json(Json& j, const EvalOutcome& o) {
  j = Json{{"sim_passed", o.sim_passed},
           {"synth_succeeded", o.synth_succeeded},
           {"ppa", o.ppa ? Json(*o.ppa) : Json(nullptr)},
           {"sim_log", o.sim_log},
           {"synth_log", o.synth_log},
           {"post_synth_functional",
            o.post_synth_functional ? Json(*o.post_synth_functional) : Json(nullptr)}};
}

void from_json(const Json& j, EvalOutcome& o) {
  o.sim_passed = j.at("sim_passed").get<bool>();
  o.synth_succeeded = j.at("synth_succeeded").get<bool>();
  const auto& ppa = j.at("ppa");
  o.ppa = ppa.is_null() ? std::nullopt : std::optional<PpaMetrics>(ppa.get<PpaMetrics>());
  o.sim_log = j.at("sim_log").get<std::string>();
  o.synth_log = j.at("synth_log").get<std::string>();
  const auto& psf = j.at("post_synth_functional");
  o.post_synth_functional = psf.is_null() ? std::nullopt : std::optional<bool>(psf.get<bool>());
}

void to_json(Json& j, const Lineage& l) {
  j = Json{{"parents", l.parents},
           {"strategy", l.strategy ? Json(to_string(*l.strategy)) : Json(nullptr)}};
}

void from_json(const Json& j, Lineage& l) {
  l.parents = j.at("parents").get<std::vector<IndividualId>>();
  const auto& s = j.at("strategy");
  l.strategy = s.is_null() ? std::nullopt : std::optional<PromptStrategy>(strategy_of(s));
}

void to_json(Json& j, const Individual& ind) {
  j = Json{{"id", ind.id},
           {"generation_born", ind.generation_born},
           {"lineage", ind.lineage},
           {"fitness", ind.fitness ? real_to_json(*ind.fitness) : Json(nullptr)},
           {"thought", ind.thought},
           {"code", ind.code},
           {"feedback", ind.feedback ? Json(*ind.feedback) : Json(nullptr)},
           {"outcome", ind.outcome ? Json(*ind.outcome) : Json(nullptr)}};
}

void from_json(const Json& j, Individual& ind) {
  ind.id = j.at("id").get<IndividualId>();
  ind.generation_born = j.at("generation_born").get<int>();
  ind.lineage = j.at("lineage").get<Lineage>();
  const auto& f = j.at("fitness");
  ind.fitness = f.is_null() ? std::nullopt : std::optional<double>(real_from_json(f));
  ind.thought = j.at("thought").get<std::string>();
  ind.code = j.at("code").get<std::string>();
  const auto& fb = j.at("feedback");
  ind.feedback = fb.is_null() ? std::nullopt : std::optional<std::string>(fb.get<std::string>());
  const auto& o = j.at("outcome");
  ind.outcome = o.is_null() ? std::nullopt : std::optional<EvalOutcome>(o.get<EvalOutcome>());
}

void to_json(Json& j, const StrategyStats& s) {
  j = Json{{"q_value", s.q_value}, {"pull_count", s.pull_count}};
}

void from_json(const Json& j, StrategyStats& s) {
  s.q_value = j.at("q_value").get<double>();
  s.pull_count = j.at("pull_count").get<std::uint64_t>();
}

void to_json(Json& j, const BanditSnapshot& b) {
  Json arms = Json::array();
  for (const auto& a : b.arms) {
    arms.push_back({{"strategy", to_string(a.strategy)},
                    {"q_value", a.stats.q_value},
                    {"pull_count", a.stats.pull_count}});
  }
  j = Json{{"arms", arms},
           {"total_pulls", b.total_pulls},
           {"exploration_c", b.exploration_c},
           {"temperature", b.temperature}};
}

void from_json(const Json& j, BanditSnapshot& b) {
  b.arms.clear();
  for (const auto& a : j.at("arms")) {
    b.arms.push_back({strategy_of(a.at("strategy")), a.get<StrategyStats>()});
  }
  b.total_pulls = j.at("total_pulls").get<std::uint64_t>();
  b.exploration_c = j.at("exploration_c").get<double>();
  b.temperature = j.at("temperature").get<double>();
}

void to_json(Json& j, const StrategyEvent& e) {
  j = Json{{"label", to_string(e.label)},
           {"strategy", to_string(e.strategy)},
           {"reward", e.reward},
           {"offspring", e.offspring}};
}

void from_json(const Json& j, StrategyEvent& e) {
  e.label = label_of(j.at("label"));
  e.strategy = strategy_of(j.at("strategy"));
  e.reward = j.at("reward").get<double>();
  e.offspring = j.at("offspring").get<IndividualId>();
}

void to_json(Json& j, const GenerationRecord& r) {
  j = Json{{"schema_version", kSchemaVersion},
           {"generation_index", r.generation_index},
           {"fail_count", r.fail_count},
           {"success_count", r.success_count},
           {"quota_fail", r.quota_fail},
           {"quota_success", r.quota_success},
           {"best_so_far", r.best_so_far},
           {"best_fitness", real_to_json(r.best_fitness)},
           {"strategy_events", r.strategy_events},
           {"fail_bandit", r.fail_bandit},
           {"success_bandit", r.success_bandit},
           {"notes", r.notes},
           {"population", r.population},
           {"offspring", r.offspring}};
}

void from_json(const Json& j, GenerationRecord& r) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw Json::other_error::create(
        501, "unsupported schema_version " + std::to_string(version), &j);
  }
  r.generation_index = j.at("generation_index").get<int>();
  r.fail_count = j.at("fail_count").get<int>();
  r.success_count = j.at("success_count").get<int>();
  r.quota_fail = j.at("quota_fail").get<int>();
  r.quota_success = j.at("quota_success").get<int>();
  r.best_so_far = j.at("best_so_far").get<IndividualId>();
  r.best_fitness = real_from_json(j.at("best_fitness"));
  r.strategy_events = j.at("strategy_events").get<std::vector<StrategyEvent>>();
  r.fail_bandit = j.at("fail_bandit").get<BanditSnapshot>();
  r.success_bandit = j.at("success_bandit").get<BanditSnapshot>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.population = j.at("population").get<std::vector<Individual>>();
  r.offspring = j.at("offspring").get<std::vector<Individual>>();
}

std::string record_to_line(const GenerationRecord& rec) { return Json(rec).dump(); }

GenerationRecord record_from_line(const std::string& line, std::size_t line_number) {
  try {
    return Json::parse(line).get<GenerationRecord>();
  } catch (const Json::exception& e) {
    throw Error("generation record on line " + std::to_string(line_number) +
                " of generations.jsonl is unreadable: " + e.what());
  }
}

}  // namespace rtlevo
