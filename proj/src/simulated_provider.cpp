#include "rtlevo/simulated_provider.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>
#include <sstream>
#include <vector>

#include "rtlevo/errors.hpp"
#include "rtlevo/evaluation.hpp"
#include "rtlevo/rng.hpp"

namespace rtlevo {
namespace {

struct ParentView {
  bool passed = false;
  std::optional<PpaMetrics> ppa;
};

// Parents appear in template order; each parent's code carries its own
// @sim / @ppa annotations.
std::vector<ParentView> parents_in(std::string_view prompt) {
  static const std::regex sim_re(R"(@sim:\s*(pass|fail))");
  std::vector<ParentView> out;
  const std::string text(prompt);
  std::vector<std::size_t> starts;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), sim_re);
       it != std::sregex_iterator(); ++it) {
    starts.push_back(static_cast<std::size_t>(it->position()));
    out.push_back({(*it)[1] == "pass", std::nullopt});
  }
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto end = i + 1 < starts.size() ? starts[i + 1] : text.size();
    out[i].ppa = read_ppa_annotation(std::string_view(text).substr(starts[i], end - starts[i]));
  }
  return out;
}

PpaMetrics scaled(const PpaMetrics& base, Rng& rng, double lo, double hi) {
  return {base.power * uniform_real(rng, lo, hi), base.area * uniform_real(rng, lo, hi),
          base.effective_clock_period * uniform_real(rng, lo, hi)};
}

std::string design(bool pass, bool synth_fail, const PpaMetrics& ppa, std::uint64_t tag) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(tag));
  std::string code;
  code += pass ? "// @sim: pass\n" : "// @sim: fail\n";
  if (synth_fail) code += "// @synth: fail\n";
  code += ppa_annotation(ppa) + "\n";
  code += "module top_module(input [7:0] a, input [7:0] b, output [8:0] s);\n";
  code += "  // variant " + std::string(hex) + "\n";
  code += "  assign s = a + b;\nendmodule";
  return code;
}

}  // namespace

void SimulatedDesignerConfig::validate() const {
  for (double p : {initial_fail_probability, fix_success_probability, repair_probability,
                   keep_correct_probability, synth_fail_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("simulated provider probabilities must be in [0, 1]");
  }
  if (!(reference.power > 0 && reference.area > 0 && reference.effective_clock_period > 0)) {
    throw ConfigError("simulated provider reference metrics must be > 0");
  }
  const auto range = [](double lo, double hi) {
    if (!(lo > 0.0 && lo <= hi)) throw ConfigError("simulated provider factor ranges need 0 < low <= high");
  };
  range(fresh_low, fresh_high);
  range(improve_low, improve_high);
  range(simplify_low, simplify_high);
  range(refactor_low, refactor_high);
  range(fusion_low, fusion_high);
}

SimulatedDesigner::SimulatedDesigner(SimulatedDesignerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

CompletionResult SimulatedDesigner::complete(const PromptBundle& bundle) {
  Rng rng(splitmix64(bundle.stream_seed ^ splitmix64(cfg_.seed)) ^ fnv1a(bundle.user_text));
  CompletionResult result;

  if (bundle.purpose == PromptPurpose::Feedback) {
    const bool failing = bundle.user_text.find("fails its testbench") != std::string::npos;
    static const char* kHints[] = {"share the adder carry chain", "remove redundant registers",
                                   "narrow the internal datapath", "retime the critical path"};
    result.text = failing ? "The output is wrong for some input combinations; check the "
                            "reset polarity and the bit widths of the sum."
                          : std::string("Passes the testbench. To improve PPA, ") +
                                kHints[uniform_index(rng, 4)] + ".";
    return result;
  }

  const auto parents = parents_in(bundle.user_text);
  const auto fresh = [&] { return scaled(cfg_.reference, rng, cfg_.fresh_low, cfg_.fresh_high); };

  bool pass = false;
  PpaMetrics ppa;
  std::string note;
  if (bundle.purpose == PromptPurpose::Initial || !bundle.strategy || parents.empty()) {
    pass = uniform01(rng) >= cfg_.initial_fail_probability;
    ppa = fresh();
    note = "A direct implementation of the description";
  } else {
    const auto strategy = *bundle.strategy;
    const auto& p1 = parents.front();
    note = std::string(to_string(strategy)) + " of the parent design";
    if (!p1.passed) {
      const double repair =
          strategy == PromptStrategy::Fix ? cfg_.fix_success_probability : cfg_.repair_probability;
      pass = uniform01(rng) < repair;
      ppa = fresh();
    } else {
      pass = uniform01(rng) < cfg_.keep_correct_probability;
      const PpaMetrics base = p1.ppa.value_or(cfg_.reference);
      switch (strategy) {
        case PromptStrategy::Improve:
          ppa = scaled(base, rng, cfg_.improve_low, cfg_.improve_high);
          break;
        case PromptStrategy::Simplify:
          ppa = scaled(base, rng, cfg_.simplify_low, cfg_.simplify_high);
          break;
        case PromptStrategy::Refactor:
          ppa = scaled(base, rng, cfg_.refactor_low, cfg_.refactor_high);
          break;
        case PromptStrategy::Fusion: {
          PpaMetrics best = base;
          if (parents.size() > 1 && parents[1].ppa) {
            best.power = std::min(best.power, parents[1].ppa->power);
            best.area = std::min(best.area, parents[1].ppa->area);
            best.effective_clock_period =
                std::min(best.effective_clock_period, parents[1].ppa->effective_clock_period);
          }
          ppa = scaled(best, rng, cfg_.fusion_low, cfg_.fusion_high);
          break;
        }
        case PromptStrategy::Explore:
        case PromptStrategy::Fix:
          ppa = fresh();
          break;
      }
    }
  }
  const bool synth_fail = pass && uniform01(rng) < cfg_.synth_fail_probability;
  const std::uint64_t tag = rng();
  result.text = render_response(note + ", variant " + std::to_string(tag % 100000) + ".",
                                design(pass, synth_fail, ppa, tag));
  return result;
}

}  // namespace rtlevo
