#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtlevo/types.hpp"

namespace rtlevo {

enum class PromptPurpose { Initial, Evolutionary, Feedback };

std::string_view to_string(PromptPurpose p) noexcept;

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  // Absent for the Initial Prompt and for feedback requests.
  std::optional<PromptStrategy> strategy;
  std::vector<IndividualId> parent_ids;
  PromptPurpose purpose = PromptPurpose::Initial;
  // Per-request random stream; stochastic providers draw from it so results do
  // not depend on call order.
  std::uint64_t stream_seed = 0;
};

// Fail: {Fix, Simplify, Explore, Refactor, Improve}
// Success: {Simplify, Explore, Refactor, Improve, Fusion}
std::vector<PromptStrategy> allowed_strategies(PopulationLabel label);

// Substitutes `{name}` placeholders in one pass; inserted values are never
// rescanned. `{{` and `}}` produce literal braces. A brace that does not open
// a well-formed `{identifier}` is copied through, so Verilog concatenations in
// templates need no escaping. Throws UsageError for an identifier with no value.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// Placeholders every template may use. Anything else is rejected at load time.
const std::vector<std::string>& template_placeholders();

struct FeedbackSettings {
  // Tail of the simulation log included in Fail feedback prompts.
  std::size_t log_tail_chars = 4000;
};

// The editable prompt templates. File names inside a template directory:
//   system.txt, output_format.txt, initial.txt,
//   fix.txt, simplify.txt, explore.txt, refactor.txt, improve.txt, fusion.txt,
//   feedback_fail.txt, feedback_success.txt
class PromptLibrary {
 public:
  static PromptLibrary defaults();
  // Files missing from `dir` keep their default text.
  static PromptLibrary load_dir(const std::filesystem::path& dir);

  // Name -> template text, in the file naming above without ".txt".
  const std::map<std::string, std::string>& templates() const noexcept { return templates_; }
  void set_template(const std::string& name, std::string text);

  bool include_testbench = false;
  FeedbackSettings feedback;

  PromptBundle initial(const ProblemSpec& spec) const;
  // Throws UsageError on arity mismatch or a parent missing thought/code/feedback.
  PromptBundle evolutionary(PromptStrategy strategy, const ProblemSpec& spec,
                            std::span<const Individual> parents) const;
  // Requires an evaluated individual.
  PromptBundle feedback_request(const Individual& ind, const ProblemSpec& spec) const;

 private:
  std::map<std::string, std::string> base_values(const ProblemSpec& spec) const;
  const std::string& get(const std::string& name) const;

  std::map<std::string, std::string> templates_;
};

PromptBundle build_initial_prompt(const ProblemSpec& spec);
PromptBundle build_evolutionary_prompt(PromptStrategy strategy, const ProblemSpec& spec,
                                       std::span<const Individual> parents);

struct ParsedResponse {
  std::string thought;
  std::string code;
  // True when no tagged Thought section was found and the prose preceding the
  // code block was used instead.
  bool thought_degraded = false;
};

// Thought = the tagged "Thought" section (or the prose before the code when
// untagged); Code = first complete fenced block. Throws ParseError(NoCode)
// when no complete fenced block exists, ParseError(EmptyCode) when the first
// block is blank.
ParsedResponse parse_llm_response(std::string_view text);

// The instructed response format; parse_llm_response inverts it.
std::string render_response(std::string_view thought, std::string_view code);

}  // namespace rtlevo
