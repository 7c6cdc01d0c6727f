#include "rtlevo/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "default_templates.hpp"
#include "rtlevo/errors.hpp"

namespace rtlevo {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string format_metric(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string tail(std::string_view s, std::size_t n) {
  if (s.size() <= n) return std::string(s);
  return std::string(s.substr(s.size() - n));
}

const std::vector<std::string> kTemplateNames = {
    "system",   "output_format", "initial", "fix",           "simplify",        "explore",
    "refactor", "improve",       "fusion",  "feedback_fail", "feedback_success"};

std::string template_name(PromptStrategy s) { return lower(to_string(s)); }

// Splits text into lines, keeping the offset of each line start.
struct Line {
  std::size_t begin;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back({pos, text.substr(pos, nl - pos)});
    pos = nl + 1;
  }
  return lines;
}

bool is_fence(std::string_view line) {
  const auto first = line.find_first_not_of(" \t");
  return first != std::string_view::npos && line.substr(first).starts_with("```");
}

// "# ...", a line that is entirely bold ("**Code**"), or "Code:".
bool is_header(std::string_view line) {
  const std::string s = trim(line);
  if (s.empty()) return false;
  if (s[0] == '#') return true;
  if (s.size() > 4 && s.starts_with("**")) {
    const auto close = s.find("**", 2);
    if (close != std::string::npos && close > 2) {
      const auto rest = s.substr(close + 2);
      if (rest.empty() || rest == ":") return true;
    }
  }
  return lower(s).starts_with("code:");
}

// Returns the inline remainder when `line` opens a Thought section
// ("## Thought", "Thought:", "**Thought**", ...), nullopt otherwise. Plain prose
// starting with the word needs a colon to count.
std::optional<std::string> thought_header(std::string_view line) {
  const std::string s = trim(line);
  std::size_t i = 0;
  bool marked = false;
  while (i < s.size() && (s[i] == '#' || s[i] == '*' || s[i] == ' ')) {
    marked = marked || s[i] != ' ';
    ++i;
  }
  if (!lower(std::string_view(s).substr(i)).starts_with("thought")) return std::nullopt;
  std::size_t j = i + 7;
  if (j < s.size() && is_ident_char(s[j])) return std::nullopt;  // "thoughts", "thoughtful"
  bool colon = false;
  while (j < s.size() && (s[j] == '*' || s[j] == ':' || s[j] == ' ')) {
    colon = colon || s[j] == ':';
    ++j;
  }
  if (!marked && !colon) return std::nullopt;
  return s.substr(j);
}

}  // namespace

std::string_view to_string(PromptPurpose p) noexcept {
  switch (p) {
    case PromptPurpose::Initial: return "initial";
    case PromptPurpose::Evolutionary: return "evolutionary";
    case PromptPurpose::Feedback: return "feedback";
  }
  return "unknown";
}

std::vector<PromptStrategy> allowed_strategies(PopulationLabel label) {
  using enum PromptStrategy;
  if (label == PopulationLabel::Fail) return {Fix, Simplify, Explore, Refactor, Improve};
  return {Simplify, Explore, Refactor, Improve, Fusion};
}

const std::vector<std::string>& template_placeholders() {
  static const std::vector<std::string> names = {
      "functional_description", "testbench",         "output_format",
      "parent_thought_1",       "parent_code_1",     "parent_feedback_1",
      "parent_thought_2",       "parent_code_2",     "parent_feedback_2",
      "code",                   "sim_log",           "synth_log",
      "gen_power",              "gen_area",          "gen_period",
      "ref_power",              "ref_area",          "ref_period",
      "problem_name"};
  return names;
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_ident_char(tmpl[j])) ++j;
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}' &&
          !std::isdigit(static_cast<unsigned char>(tmpl[i + 1]))) {
        const std::string name(tmpl.substr(i + 1, j - i - 1));
        const auto it = values.find(name);
        if (it == values.end()) throw UsageError("template placeholder {" + name + "} has no value");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  lib.templates_ = detail::default_templates();
  return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("template directory does not exist: " + dir.string());
  }
  PromptLibrary lib = defaults();
  for (const auto& name : kTemplateNames) {
    const auto path = dir / (name + ".txt");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    lib.set_template(name, ss.str());
  }
  return lib;
}

void PromptLibrary::set_template(const std::string& name, std::string text) {
  if (std::find(kTemplateNames.begin(), kTemplateNames.end(), name) == kTemplateNames.end()) {
    throw ConfigError("unknown template name: " + name);
  }
  // Reject unknown placeholders up front rather than at first use.
  std::map<std::string, std::string> probe;
  for (const auto& p : template_placeholders()) probe[p] = "";
  try {
    (void)render_template(text, probe);
  } catch (const UsageError& e) {
    throw ConfigError("template '" + name + "': " + e.what());
  }
  templates_[name] = std::move(text);
}

const std::string& PromptLibrary::get(const std::string& name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw UsageError("missing template: " + name);
  return it->second;
}

std::map<std::string, std::string> PromptLibrary::base_values(const ProblemSpec& spec) const {
  std::map<std::string, std::string> v;
  v["functional_description"] = spec.functional_description;
  v["problem_name"] = spec.name;
  v["output_format"] = trim(get("output_format"));
  if (include_testbench && !spec.testbench_source.empty()) {
    v["testbench"] = "\n### Testbench\n```verilog\n" + trim(spec.testbench_source) + "\n```\n";
  } else {
    v["testbench"] = "";
  }
  return v;
}

PromptBundle PromptLibrary::initial(const ProblemSpec& spec) const {
  PromptBundle b;
  b.system_text = trim(get("system"));
  b.user_text = render_template(get("initial"), base_values(spec));
  b.purpose = PromptPurpose::Initial;
  return b;
}

PromptBundle PromptLibrary::evolutionary(PromptStrategy strategy, const ProblemSpec& spec,
                                         std::span<const Individual> parents) const {
  if (static_cast<int>(parents.size()) != arity(strategy)) {
    throw UsageError(std::string(to_string(strategy)) + " takes " +
                     std::to_string(arity(strategy)) + " parent(s), got " +
                     std::to_string(parents.size()));
  }
  auto values = base_values(spec);
  PromptBundle b;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const auto& p = parents[i];
    if (p.code.empty()) throw UsageError("parent " + std::to_string(p.id) + " has no code");
    if (!p.feedback) throw UsageError("parent " + std::to_string(p.id) + " has no feedback");
    const auto k = std::to_string(i + 1);
    values["parent_thought_" + k] = p.thought;
    values["parent_code_" + k] = p.code;
    values["parent_feedback_" + k] = *p.feedback;
    b.parent_ids.push_back(p.id);
  }
  b.system_text = trim(get("system"));
  b.user_text = render_template(get(template_name(strategy)), values);
  b.strategy = strategy;
  b.purpose = PromptPurpose::Evolutionary;
  return b;
}

PromptBundle PromptLibrary::feedback_request(const Individual& ind, const ProblemSpec& spec) const {
  if (!ind.outcome) throw UsageError("feedback requested for an unevaluated individual");
  auto values = base_values(spec);
  values["code"] = ind.code;
  values["sim_log"] = tail(ind.outcome->sim_log, feedback.log_tail_chars);
  values["synth_log"] = tail(ind.outcome->synth_log, feedback.log_tail_chars);
  const auto& ref = spec.reference_ppa;
  values["ref_power"] = format_metric(ref.power);
  values["ref_area"] = format_metric(ref.area);
  values["ref_period"] = format_metric(ref.effective_clock_period);
  if (ind.outcome->ppa) {
    values["gen_power"] = format_metric(ind.outcome->ppa->power);
    values["gen_area"] = format_metric(ind.outcome->ppa->area);
    values["gen_period"] = format_metric(ind.outcome->ppa->effective_clock_period);
  } else {
    values["gen_power"] = values["gen_area"] = values["gen_period"] = "unavailable (synthesis failed)";
  }
  PromptBundle b;
  b.system_text = trim(get("system"));
  b.user_text = render_template(
      get(ind.outcome->sim_passed ? "feedback_success" : "feedback_fail"), values);
  b.purpose = PromptPurpose::Feedback;
  b.parent_ids = {ind.id};
  return b;
}

PromptBundle build_initial_prompt(const ProblemSpec& spec) {
  return PromptLibrary::defaults().initial(spec);
}

PromptBundle build_evolutionary_prompt(PromptStrategy strategy, const ProblemSpec& spec,
                                       std::span<const Individual> parents) {
  return PromptLibrary::defaults().evolutionary(strategy, spec, parents);
}

ParsedResponse parse_llm_response(std::string_view raw) {
  std::string normalized;
  if (raw.find('\r') != std::string_view::npos) {
    normalized.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') continue;
      normalized += raw[i];
    }
    raw = normalized;
  }
  const std::string_view text = raw;
  const auto lines = split_lines(text);
  std::optional<std::size_t> open, close;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i].text)) continue;
    if (!open) {
      open = i;
    } else {
      close = i;
      break;
    }
  }
  if (!open || !close) throw ParseError(ParseErrorKind::NoCode);

  const std::size_t code_begin = lines[*open + 1].begin;
  const std::size_t code_end = lines[*close].begin;
  ParsedResponse r;
  r.code = trim(text.substr(code_begin, code_end - code_begin));
  if (r.code.empty()) throw ParseError(ParseErrorKind::EmptyCode);

  // Tagged Thought section: from the header to the next header or the fence.
  for (std::size_t i = 0; i < *open; ++i) {
    const auto inline_rest = thought_header(lines[i].text);
    if (!inline_rest) continue;
    std::string body = *inline_rest;
    for (std::size_t j = i + 1; j < *open && !is_header(lines[j].text); ++j) {
      body += '\n';
      body += lines[j].text;
    }
    r.thought = trim(body);
    return r;
  }
  r.thought = trim(text.substr(0, lines[*open].begin));
  r.thought_degraded = true;
  return r;
}

std::string render_response(std::string_view thought, std::string_view code) {
  std::string out = "## Thought\n";
  out += thought;
  out += "\n\n## Code\n```verilog\n";
  out += code;
  out += "\n```\n";
  return out;
}

}  // namespace rtlevo
