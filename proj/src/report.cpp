#include "rtlevo/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>

#include "rtlevo/errors.hpp"
#include "rtlevo/json_io.hpp"

namespace rtlevo {

namespace fs = std::filesystem;

namespace {

std::string fitness_text(double f) {
  if (std::isinf(f)) return f < 0 ? "-inf" : "inf";
  return fmt::format("{:.6f}", f);
}

// Every individual in the run once, keyed by id: the generation-0 population
// and each generation's offspring.
std::map<IndividualId, const Individual*> all_individuals(const RunData& run) {
  std::map<IndividualId, const Individual*> out;
  for (const auto& rec : run.records) {
    for (const auto& ind : rec.population) out.emplace(ind.id, &ind);
    for (const auto& ind : rec.offspring) out.emplace(ind.id, &ind);
  }
  return out;
}

double pass_rate(const GenerationRecord& rec) {
  const int total = rec.fail_count + rec.success_count;
  return total == 0 ? 0.0 : 100.0 * rec.success_count / total;
}

std::optional<double> offspring_pass_rate(const GenerationRecord& rec) {
  if (rec.offspring.empty()) return std::nullopt;
  int passed = 0;
  for (const auto& o : rec.offspring) passed += o.outcome && o.outcome->sim_passed ? 1 : 0;
  return 100.0 * passed / static_cast<double>(rec.offspring.size());
}

}  // namespace

std::vector<GenerationBand> generation_bands(int max_generation) {
  const int g = std::max(0, max_generation);
  const int b1 = static_cast<int>(std::lround(0.25 * g));
  const int b2 = static_cast<int>(std::lround(0.6 * g));
  std::vector<GenerationBand> bands;
  for (const GenerationBand b : {GenerationBand{0, b1 - 1}, GenerationBand{b1, b2 - 1},
                                 GenerationBand{b2, g}}) {
    if (b.first <= b.last) bands.push_back(b);
  }
  return bands;
}

double improvement_percent(double generated, double reference) noexcept {
  return (reference - generated) / reference * 100.0;
}

std::optional<PpaImprovement> improvement_of(const Individual& ind, const PpaMetrics& ref) {
  if (!ind.outcome || !ind.outcome->sim_passed || !ind.outcome->synth_succeeded ||
      !ind.outcome->ppa) {
    return std::nullopt;
  }
  if (ind.outcome->post_synth_functional == false) return std::nullopt;
  const auto& gen = *ind.outcome->ppa;
  return PpaImprovement{improvement_percent(gen.power, ref.power),
                        improvement_percent(gen.area, ref.area),
                        improvement_percent(gen.effective_clock_period, ref.effective_clock_period)};
}

const Individual& RunData::find(IndividualId id) const {
  for (const auto& rec : records) {
    for (const auto& ind : rec.population) {
      if (ind.id == id) return ind;
    }
    for (const auto& ind : rec.offspring) {
      if (ind.id == id) return ind;
    }
  }
  throw UsageError("individual " + std::to_string(id) + " does not appear in any record");
}

const Individual& RunData::best() const {
  if (records.empty()) throw UsageError("run has no generation records");
  return find(records.back().best_so_far);
}

RunData load_run(const fs::path& dir) {
  RunData run;
  run.dir = dir;
  const auto meta_path = dir / "run.json";
  const auto gens_path = dir / "generations.jsonl";
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  {
    std::ifstream in(meta_path);
    if (!in) throw Error("no run found in " + dir.string() + ": run.json is missing");
    try {
      run.meta = nlohmann::json::parse(in);
      run.reference_ppa = run.meta.at("reference_ppa").get<PpaMetrics>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("run.json in " + dir.string() + " is corrupt: " + e.what());
    }
  }
  std::ifstream in(gens_path);
  if (!in) throw Error("no run found in " + dir.string() + ": generations.jsonl is missing");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const int expected = static_cast<int>(run.records.size());
    try {
      run.records.push_back(record_from_line(line, line_number));
    } catch (const Error& e) {
      throw Error("generation " + std::to_string(expected) + ": " + e.what());
    }
    if (run.records.back().generation_index != expected) {
      throw Error("generation " + std::to_string(expected) + ": found a record for generation " +
                  std::to_string(run.records.back().generation_index) + " instead");
    }
  }
  if (run.records.empty()) throw Error("generations.jsonl in " + dir.string() + " has no records");
  return run;
}

nlohmann::json report_json(const RunData& run) {
  using nlohmann::json;
  const auto& best = run.best();
  const bool found = best.outcome && best.outcome->sim_passed;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["found_correct"] = found;
  if (!found) j["message"] = "no functionally correct design found";
  j["generations"] = run.records.back().generation_index;
  j["reference_ppa"] = run.reference_ppa;
  j["best"] = best;
  if (const auto imp = improvement_of(best, run.reference_ppa)) {
    j["improvement_percent"] = {{"power", imp->power}, {"area", imp->area}, {"period", imp->period}};
  } else {
    j["improvement_percent"] = nullptr;
  }
  json trajectory = json::array();
  for (const auto& rec : run.records) {
    const auto off = offspring_pass_rate(rec);
    trajectory.push_back({{"generation", rec.generation_index},
                          {"fail_count", rec.fail_count},
                          {"success_count", rec.success_count},
                          {"pass_rate_percent", pass_rate(rec)},
                          {"offspring_pass_rate_percent", off ? json(*off) : json(nullptr)},
                          {"best_fitness", real_to_json(rec.best_fitness)}});
  }
  j["trajectory"] = trajectory;
  j["fail_bandit"] = run.records.back().fail_bandit;
  j["success_bandit"] = run.records.back().success_bandit;
  return j;
}

std::string render_report(const RunData& run) {
  std::string out;
  const auto& last = run.records.back();
  const auto& best = run.best();
  const bool found = best.outcome && best.outcome->sim_passed;

  const auto meta_str = [&](const char* key) {
    return run.meta.contains(key) && run.meta[key].is_string() ? run.meta[key].get<std::string>()
                                                               : std::string("?");
  };
  out += fmt::format("Run: {}\n", run.dir.string());
  out += fmt::format("Problem: {}   provider: {}   evaluator: {}\n", meta_str("problem"),
                     meta_str("provider"), meta_str("evaluator"));
  out += fmt::format("Generations: 0-{}\n\n", last.generation_index);

  out += "== Best design ==\n";
  if (!found) out += "No functionally correct design found.\n";
  out += fmt::format("Individual {} (generation {}", best.id, best.generation_born);
  if (best.lineage.strategy) out += fmt::format(", {}", to_string(*best.lineage.strategy));
  out += fmt::format(")   fitness {}\n\n", fitness_text(best.fitness_or_worst()));
  out += "Thought:\n" + best.thought + "\n\nCode:\n" + best.code + "\n\n";

  out += "== PPA vs reference ==\n";
  const auto& ref = run.reference_ppa;
  if (const auto imp = improvement_of(best, ref)) {
    const auto& gen = *best.outcome->ppa;
    out += fmt::format("Power improv. {:.1f}%   ({:.6g} vs {:.6g})\n", imp->power, gen.power, ref.power);
    out += fmt::format("Area improv. {:.1f}%   ({:.6g} vs {:.6g})\n", imp->area, gen.area, ref.area);
    out += fmt::format("Period improv. {:.1f}%   ({:.6g} vs {:.6g})\n", imp->period,
                       gen.effective_clock_period, ref.effective_clock_period);
  } else {
    out += "No PPA comparison: the best design has no valid post-synthesis metrics.\n";
  }
  out += "\n";

  out += "== Pass rate by generation ==\n";
  out += fmt::format("{:>4} {:>5} {:>8} {:>10} {:>10} {:>14}\n", "gen", "fail", "success",
                     "pass %", "offspr. %", "best fitness");
  for (const auto& rec : run.records) {
    const auto off = offspring_pass_rate(rec);
    out += fmt::format("{:>4} {:>5} {:>8} {:>10.1f} {:>10} {:>14}\n", rec.generation_index,
                       rec.fail_count, rec.success_count, pass_rate(rec),
                       off ? fmt::format("{:.1f}", *off) : std::string("-"),
                       fitness_text(rec.best_fitness));
  }
  out += "\n";

  out += "== Strategy statistics ==\n";
  out += fmt::format("{:<8} {:<9} {:>6} {:>9}\n", "pop", "strategy", "pulls", "Q");
  for (const auto& [name, snap] : {std::pair{"Fail", &last.fail_bandit},
                                   std::pair{"Success", &last.success_bandit}}) {
    for (const auto& arm : snap->arms) {
      out += fmt::format("{:<8} {:<9} {:>6} {:>9.4f}\n", name, to_string(arm.strategy),
                         arm.stats.pull_count, arm.stats.q_value);
    }
  }
  out += "\n";

  out += "== Power/area of correct designs by generation band ==\n";
  const auto everyone = all_individuals(run);
  for (const auto& band : generation_bands(last.generation_index)) {
    std::vector<const Individual*> members;
    for (const auto& [id, ind] : everyone) {
      if (ind->generation_born >= band.first && ind->generation_born <= band.last &&
          ind->outcome && ind->outcome->ppa && ind->outcome->synth_succeeded) {
        members.push_back(ind);
      }
    }
    out += fmt::format("Generations {}-{}: {} designs\n", band.first, band.last, members.size());
    if (members.empty()) continue;
    out += fmt::format("  {:>6} {:>4} {:>12} {:>12}\n", "id", "gen", "power", "area");
    for (const auto* ind : members) {
      out += fmt::format("  {:>6} {:>4} {:>12.6g} {:>12.6g}\n", ind->id, ind->generation_born,
                         ind->outcome->ppa->power, ind->outcome->ppa->area);
    }
  }
  return out;
}

}  // namespace rtlevo
