#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlevo/record.hpp"

namespace rtlevo {

struct GenerationBand {
  int first = 0;
  int last = 0;

  bool operator==(const GenerationBand&) const = default;
};

// Early, middle and late generation bands: for G = 20 these are 0-4, 5-11
// and 12-20. Cut points scale with G; empty bands are dropped.
std::vector<GenerationBand> generation_bands(int max_generation);

// (ref - gen) / ref * 100.
double improvement_percent(double generated, double reference) noexcept;

struct PpaImprovement {
  double power = 0.0;
  double area = 0.0;
  double period = 0.0;
};

// Improvement of `ind` over `ref`, or nothing when the design has no PPA or
// failed an enabled gate-level check.
std::optional<PpaImprovement> improvement_of(const Individual& ind, const PpaMetrics& ref);

struct RunData {
  std::filesystem::path dir;
  nlohmann::json meta;
  PpaMetrics reference_ppa;
  std::vector<GenerationRecord> records;

  // Throws UsageError when the id appears in no record.
  const Individual& find(IndividualId id) const;
  const Individual& best() const;
};

// Reads run.json and generations.jsonl. Throws Error naming the missing file
// or the generation whose record is corrupt or out of sequence.
RunData load_run(const std::filesystem::path& dir);

// Summary document written as report.json.
nlohmann::json report_json(const RunData& run);

// Human-readable summary: best design, PPA against the reference, pass-rate
// trajectory, bandit statistics and the power/area scatter by band.
std::string render_report(const RunData& run);

}  // namespace rtlevo
