#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rtlevo/errors.hpp"
#include "rtlevo/prompts.hpp"

using namespace rtlevo;

namespace {

ProblemSpec spec() {
  ProblemSpec s;
  s.name = "adder2";
  s.functional_description = "Build a 2-bit adder named adder2 with {cout, sum} = a + b.";
  s.testbench_source = "module tb; endmodule";
  s.reference_ppa = {2.5, 36.0, 0.35};
  return s;
}

Individual parent(IndividualId id, std::string tag) {
  Individual p;
  p.id = id;
  p.thought = "thought of " + tag;
  p.code = "module adder2(); // " + tag + "\nendmodule";
  p.feedback = "feedback for " + tag;
  p.outcome = EvalOutcome{};
  p.fitness = 0.0;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("strategy sets per population") {
  using enum PromptStrategy;
  const auto fail = allowed_strategies(PopulationLabel::Fail);
  const auto success = allowed_strategies(PopulationLabel::Success);
  CHECK(fail == std::vector{Fix, Simplify, Explore, Refactor, Improve});
  CHECK(success == std::vector{Simplify, Explore, Refactor, Improve, Fusion});

  std::set<PromptStrategy> both(fail.begin(), fail.end());
  both.insert(success.begin(), success.end());
  CHECK(both.size() == 6);
  int shared = 0;
  for (auto s : fail) shared += std::count(success.begin(), success.end(), s);
  CHECK(shared == 4);
}

TEST_CASE("render_template substitutes in one pass") {
  CHECK(render_template("a {x} b", {{"x", "1"}}) == "a 1 b");
  CHECK(render_template("{x}", {{"x", "{y}"}, {"y", "no"}}) == "{y}");
  CHECK(render_template("{{x}}", {}) == "{x}");
  CHECK(render_template("assign {cout, sum} = a + b;", {}) == "assign {cout, sum} = a + b;");
  CHECK_THROWS_AS(render_template("{missing}", {}), UsageError);
}

TEST_CASE("shipped template files are the compiled defaults") {
  const auto lib = PromptLibrary::defaults();
  const std::filesystem::path dir = std::filesystem::path(RTLEVO_SOURCE_DIR) / "templates";
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    ++files;
    const auto name = entry.path().stem().string();
    REQUIRE(lib.templates().count(name) == 1);
    CHECK(lib.templates().at(name) == slurp(entry.path()));
  }
  CHECK(files == lib.templates().size());
  CHECK(files == 11);
}

TEST_CASE("template directory overrides and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "rtlevo_test_templates";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "initial.txt") << "Design: {functional_description}\n{output_format}\n";
  }
  const auto lib = PromptLibrary::load_dir(dir);
  CHECK(lib.initial(spec()).user_text.starts_with("Design: Build a 2-bit adder"));
  CHECK(lib.templates().at("fix") == PromptLibrary::defaults().templates().at("fix"));

  {
    std::ofstream(dir / "fix.txt") << "{parent_wisdom}";
  }
  CHECK_THROWS_AS(PromptLibrary::load_dir(dir), ConfigError);
  std::filesystem::remove_all(dir);

  auto l2 = PromptLibrary::defaults();
  CHECK_THROWS_AS(l2.set_template("mutate", "x"), ConfigError);
  CHECK_THROWS_AS(PromptLibrary::load_dir(dir), ConfigError);
}

TEST_CASE("initial prompt") {
  const auto b = build_initial_prompt(spec());
  CHECK(b.user_text.find(spec().functional_description) != std::string::npos);
  CHECK(b.parent_ids.empty());
  CHECK_FALSE(b.strategy.has_value());
  CHECK(b.purpose == PromptPurpose::Initial);
  CHECK(b.user_text.find("## Thought") != std::string::npos);
  CHECK(b.user_text.find("```verilog") != std::string::npos);
  CHECK(b.user_text.find("exactly one") != std::string::npos);
  // Testbench stays out unless enabled.
  CHECK(b.user_text.find("module tb;") == std::string::npos);

  auto lib = PromptLibrary::defaults();
  lib.include_testbench = true;
  CHECK(lib.initial(spec()).user_text.find("module tb;") != std::string::npos);
}

TEST_CASE("evolutionary prompts carry parents verbatim") {
  const auto p1 = parent(3, "alpha");
  const auto p2 = parent(8, "beta");

  const std::vector<Individual> pair{p1, p2};
  const auto fusion = build_evolutionary_prompt(PromptStrategy::Fusion, spec(), pair);
  for (const auto& p : pair) {
    CHECK(fusion.user_text.find(p.thought) != std::string::npos);
    CHECK(fusion.user_text.find(p.code) != std::string::npos);
  }
  CHECK(fusion.parent_ids == std::vector<IndividualId>{3, 8});
  CHECK(fusion.strategy == PromptStrategy::Fusion);

  const std::vector<Individual> one{p1};
  const auto fix = build_evolutionary_prompt(PromptStrategy::Fix, spec(), one);
  CHECK(fix.user_text.find("feedback for alpha") != std::string::npos);
  CHECK(fix.user_text.find(p1.code) != std::string::npos);
  CHECK(fix.user_text.find(spec().functional_description) != std::string::npos);
  CHECK(fix.user_text.find("Fix") != std::string::npos);
  CHECK(fix.purpose == PromptPurpose::Evolutionary);

  for (auto s : kAllStrategies) {
    std::vector<Individual> parents{p1};
    if (arity(s) == 2) parents.push_back(p2);
    const auto b = build_evolutionary_prompt(s, spec(), parents);
    CHECK(b.parent_ids.size() == static_cast<std::size_t>(arity(s)));
    CHECK(b.user_text.find(p1.code) != std::string::npos);
    CHECK(b.user_text.find("## Code") != std::string::npos);
  }
}

TEST_CASE("evolutionary prompt preconditions") {
  const std::vector<Individual> one{parent(1, "x")};
  CHECK_THROWS_AS(build_evolutionary_prompt(PromptStrategy::Fusion, spec(), one), UsageError);
  const std::vector<Individual> two{parent(1, "x"), parent(2, "y")};
  CHECK_THROWS_AS(build_evolutionary_prompt(PromptStrategy::Fix, spec(), two), UsageError);

  auto bare = parent(1, "x");
  bare.feedback.reset();
  const std::vector<Individual> no_feedback{bare};
  CHECK_THROWS_AS(build_evolutionary_prompt(PromptStrategy::Improve, spec(), no_feedback), UsageError);
}

TEST_CASE("feedback requests") {
  auto lib = PromptLibrary::defaults();
  lib.feedback.log_tail_chars = 10;
  auto failing = parent(4, "bad");
  failing.outcome->sim_passed = false;
  failing.outcome->sim_log = std::string(50, 'x') + "MISMATCH at 7";
  const auto f = lib.feedback_request(failing, spec());
  CHECK(f.purpose == PromptPurpose::Feedback);
  CHECK(f.user_text.find("fails its testbench") != std::string::npos);
  CHECK(f.user_text.find("MATCH at 7") != std::string::npos);
  CHECK(f.user_text.find("ISMATCH") == std::string::npos);
  CHECK(f.user_text.find("xxxxxxxxxxx") == std::string::npos);

  auto passing = parent(5, "good");
  passing.outcome->sim_passed = true;
  passing.outcome->synth_succeeded = true;
  passing.outcome->ppa = PpaMetrics{1.25, 18.5, 0.42};
  const auto s = lib.feedback_request(passing, spec());
  for (const char* n : {"1.25", "18.5", "0.42", "2.5", "36", "0.35"}) {
    CHECK(s.user_text.find(n) != std::string::npos);
  }

  Individual unevaluated;
  CHECK_THROWS_AS(lib.feedback_request(unevaluated, spec()), UsageError);
}

TEST_CASE("parse: tagged thought and first code block") {
  const auto r = parse_llm_response("## Thought\nuse carry-lookahead\n```\nmodule m; endmodule\n```");
  CHECK(r.thought == "use carry-lookahead");
  CHECK(r.code == "module m; endmodule");
  CHECK_FALSE(r.thought_degraded);

  const auto two = parse_llm_response(
      "Thought: first\n```verilog\nmodule a; endmodule\n```\ntext\n```verilog\nmodule b; endmodule\n```\n");
  CHECK(two.code == "module a; endmodule");
  CHECK(two.thought == "first");

  const auto bold = parse_llm_response("**Thought:** shared XOR\n\n**Code**\n```v\nx\n```");
  CHECK(bold.thought == "shared XOR");
}

TEST_CASE("parse: thought stops at the next header") {
  const auto r = parse_llm_response(
      "# Thought\nline one\nline two\n## Code\n```verilog\nmodule m; endmodule\n```\n");
  CHECK(r.thought == "line one\nline two");
}

TEST_CASE("parse: untagged prose is used as a degraded thought") {
  const auto r = parse_llm_response("I will ripple the carry.\n```verilog\nmodule m; endmodule\n```");
  CHECK(r.thought == "I will ripple the carry.");
  CHECK(r.thought_degraded);
  // A word starting with "thought" without a marker or colon is prose.
  const auto p = parse_llm_response("Thoughtful design.\n```\nm\n```");
  CHECK(p.thought_degraded);
}

TEST_CASE("parse: malformed responses") {
  auto kind_of = [](std::string_view text) {
    try {
      parse_llm_response(text);
    } catch (const ParseError& e) {
      return e.kind();
    }
    FAIL("no ParseError");
    return ParseErrorKind::NoCode;
  };
  CHECK(kind_of("## Thought\nno code at all") == ParseErrorKind::NoCode);
  CHECK(kind_of("") == ParseErrorKind::NoCode);
  CHECK(kind_of("## Thought\nx\n```verilog\n\n   \n```") == ParseErrorKind::EmptyCode);
  CHECK(kind_of("## Thought\nx\n```verilog\nmodule m;\n") == ParseErrorKind::NoCode);
}

TEST_CASE("render then parse is the identity") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"simple", "module m; endmodule"},
      {"multi\nline thought", "module m(input a, output y);\n  assign y = ~a;\nendmodule"},
      {"braces {a, b}", "assign {c, s} = a + b;"},
  };
  for (const auto& [t, c] : cases) {
    const auto r = parse_llm_response(render_response(t, c));
    CHECK(r.thought == t);
    CHECK(r.code == c);
    CHECK_FALSE(r.thought_degraded);
  }
}

TEST_CASE("parse: CRLF line endings") {
  const auto p = parse_llm_response("## Thought\r\nUse XOR.\r\n\r\n## Code\r\n```verilog\r\nmodule m;\r\nendmodule\r\n```\r\n");
  CHECK(p.thought == "Use XOR.");
  CHECK(p.code == "module m;\nendmodule");
}
