#include <chrono>
#include <cmath>
#include <regex>
#include <sstream>
#include <thread>

#include "rtlevo/errors.hpp"
#include "rtlevo/evaluation.hpp"
#include "rtlevo/rng.hpp"

namespace rtlevo {
namespace {

// Value of "// @key: value" (first occurrence), lowercased and trimmed.
std::optional<std::string> annotation(std::string_view code, std::string_view key) {
  const std::string marker = "@" + std::string(key) + ":";
  const auto pos = code.find(marker);
  if (pos == std::string_view::npos) return std::nullopt;
  auto rest = code.substr(pos + marker.size());
  rest = rest.substr(0, rest.find('\n'));
  std::string v;
  for (char c : rest) {
    if (c != ' ' && c != '\t' && c != '\r') v += static_cast<char>(std::tolower(c));
  }
  return v;
}

double hash_unit(std::uint64_t h, std::uint64_t lane) {
  return static_cast<double>(splitmix64(h + lane) >> 11) * 0x1.0p-53;
}

}  // namespace

std::string ppa_annotation(const PpaMetrics& m) {
  std::ostringstream os;
  os.precision(17);
  os << "// @ppa power=" << m.power << " area=" << m.area << " period=" << m.effective_clock_period;
  return os.str();
}

std::optional<PpaMetrics> read_ppa_annotation(std::string_view code) {
  static const std::regex re(
      R"(@ppa\s+power=([-+0-9.eE]+)\s+area=([-+0-9.eE]+)\s+period=([-+0-9.eE]+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(code.begin(), code.end(), m, re)) return std::nullopt;
  try {
    return PpaMetrics{std::stod(m[1].str()), std::stod(m[2].str()), std::stod(m[3].str())};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void SyntheticEvaluatorConfig::validate() const {
  if (!(pass_probability >= 0.0 && pass_probability <= 1.0)) {
    throw ConfigError("evaluator.pass_probability must be in [0, 1]");
  }
  if (!(hash_spread >= 0.0 && hash_spread < 1.0)) {
    throw ConfigError("evaluator.hash_spread must be in [0, 1)");
  }
  if (!(hash_base.power > 0.0 && hash_base.area > 0.0 && hash_base.effective_clock_period > 0.0)) {
    throw ConfigError("evaluator.hash_base metrics must be > 0");
  }
  if (simulated_latency_ms < 0) throw ConfigError("evaluator.simulated_latency_ms must be >= 0");
}

SyntheticEvaluator::SyntheticEvaluator(SyntheticEvaluatorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
}

bool SyntheticEvaluator::passes(const std::string& code) const {
  using Rule = SyntheticEvaluatorConfig::PassRule;
  switch (cfg_.pass_rule) {
    case Rule::Always: return true;
    case Rule::Never: return false;
    case Rule::Annotation: return annotation(code, "sim") == "pass";
    case Rule::Hash: return hash_unit(fnv1a(code, splitmix64(cfg_.seed)), 0) < cfg_.pass_probability;
  }
  return false;
}

std::optional<PpaMetrics> SyntheticEvaluator::ppa(const std::string& code) const {
  if (annotation(code, "synth") == "fail") return std::nullopt;
  if (cfg_.ppa_rule == SyntheticEvaluatorConfig::PpaRule::Annotation) {
    if (auto m = read_ppa_annotation(code)) return m;
  }
  const std::uint64_t h = fnv1a(code, splitmix64(cfg_.seed));
  const auto scale = [&](double base, std::uint64_t lane) {
    return base * (1.0 - cfg_.hash_spread + 2.0 * cfg_.hash_spread * hash_unit(h, lane));
  };
  return PpaMetrics{scale(cfg_.hash_base.power, 1), scale(cfg_.hash_base.area, 2),
                    scale(cfg_.hash_base.effective_clock_period, 3)};
}

EvalOutcome SyntheticEvaluator::assess(const std::string& code, const ProblemSpec&,
                                       const std::filesystem::path&) const {
  if (cfg_.simulated_latency_ms > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.simulated_latency_ms));
  }
  EvalOutcome out;
  out.sim_passed = passes(code);
  out.sim_log = out.sim_passed ? "synthetic simulation: all tests passed\n"
                               : "synthetic simulation: FAILED (design rejected by pass rule)\n";
  if (!out.sim_passed) return out;
  out.ppa = ppa(code);
  out.synth_succeeded = out.ppa.has_value();
  if (out.ppa) {
    std::ostringstream os;
    os.precision(17);
    os << "synthetic synthesis: power=" << out.ppa->power << " area=" << out.ppa->area
       << " period=" << out.ppa->effective_clock_period << "\n";
    out.synth_log = os.str();
  } else {
    out.synth_log = "synthetic synthesis: FAILED\n";
  }
  if (cfg_.post_synth_check && out.synth_succeeded) {
    out.post_synth_functional = annotation(code, "postsynth") != "fail";
  }
  return out;
}

PpaMetrics SyntheticEvaluator::reference_ppa(const std::string& code, const ProblemSpec&,
                                             const std::filesystem::path&) const {
  auto m = ppa(code);
  if (!m) throw Error("reference design failed to synthesize (synthetic evaluator)");
  return *m;
}

}  // namespace rtlevo
