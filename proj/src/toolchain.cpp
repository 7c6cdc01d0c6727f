#include <fstream>
#include <regex>
#include <sstream>

#include "rtlevo/errors.hpp"
#include "rtlevo/evaluation.hpp"
#include "rtlevo/process.hpp"

namespace rtlevo {
namespace {

void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw EnvironmentError("cannot write " + p.string());
  out << content;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::chrono::milliseconds stage_timeout(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

// Runs one templated stage; the log gets a header and a TIMEOUT tag on expiry.
struct StageRun {
  bool ok = false;
  bool timed_out = false;
  std::string output;
};

StageRun run_stage(std::string_view name, const std::string& tmpl,
                   const std::map<std::string, std::string>& values,
                   const std::filesystem::path& cwd, double timeout_s, std::string& log) {
  const auto argv = expand_command(tmpl, values);
  const auto r = run_process(argv, cwd, stage_timeout(timeout_s));
  log += "[" + std::string(name) + "] exit=" + std::to_string(r.exit_code) + "\n";
  log += r.output;
  if (!r.output.empty() && r.output.back() != '\n') log += '\n';
  if (r.timed_out) log += "TIMEOUT: " + std::string(name) + " exceeded " + fmt_double(timeout_s) + " s\n";
  return {r.exit_code == 0 && !r.timed_out, r.timed_out, r.output};
}

std::optional<double> to_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == 0) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

constexpr const char* kNum = R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";

}  // namespace

std::string ToolchainConfig::default_synth_script() {
  return R"(read_verilog -sv {code_file}
hierarchy -check -top {top}
synth -flatten -top {top}
dfflibmap -liberty {liberty}
abc -D {clock_ps} -liberty {liberty}
opt_clean -purge
tee -o {out_report} stat -liberty {liberty}
write_verilog -noattr -noexpr {netlist_file}
)";
}

std::string ToolchainConfig::default_sta_script() {
  return R"(read_liberty {liberty}
read_verilog {netlist_file}
link_design {top}
if {[llength [get_ports -quiet clk]] > 0} {
  create_clock -name core_clk -period {clock_ns} [get_ports clk]
} else {
  create_clock -name core_clk -period {clock_ns}
}
set_input_delay 0 -clock core_clk [all_inputs]
set_output_delay 0 -clock core_clk [all_outputs]
report_worst_slack -max -digits 6
report_power -digits 9
)";
}

void ToolchainConfig::validate() const {
  if (!(clock_period > 0.0)) throw ConfigError("toolchain.clock_period must be > 0");
  if (!(per_stage_timeout_s > 0.0)) throw ConfigError("toolchain.per_stage_timeout_s must be > 0");
  if (liberty_path.empty()) throw ConfigError("toolchain.liberty_path must be set");
  if (simulator_command.empty() || sim_run_command.empty() || synthesizer_command.empty()) {
    throw ConfigError("toolchain commands must be non-empty");
  }
  try {
    std::regex(sim_pass_pattern, std::regex::icase | std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ConfigError("toolchain.sim_pass_pattern is not a valid regex: " + std::string(e.what()));
  }
}

PpaMetrics parse_ppa_report(std::string_view raw, double clock_period) {
  const std::string text(raw);
  const std::string num = kNum;

  // Area: the last "Chip area ...: X" line (the top-level summary comes last).
  std::optional<double> area;
  {
    const std::regex re("Chip area[^:\\n]*:\\s*(" + num + ")", std::regex::icase);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
         ++it) {
      area = to_number((*it)[1]);
    }
  }
  if (!area || *area < 0.0) throw ReportError("area");

  // Power: a "Total power: X" line, or the Total row of a power table whose
  // fourth numeric column is the total.
  std::optional<double> power;
  {
    const std::regex simple("total[ _]power[^:=\\n]*[:=]\\s*(" + num + ")", std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, simple)) power = to_number(m[1]);
    if (!power) {
      const std::regex row("^\\s*Total\\s+(" + num + ")\\s+(" + num + ")\\s+(" + num + ")\\s+(" +
                           num + ")");
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        if (std::regex_search(line, m, row)) power = to_number(m[4]);
      }
    }
  }
  if (!power || *power < 0.0) throw ReportError("power");

  // Worst slack: "worst slack X", "wns X", or the minimum of report_checks
  // "X slack (MET|VIOLATED)" lines.
  std::optional<double> slack;
  {
    const std::regex ws("\\b(?:worst slack|wns)\\b\\s*[:=]?\\s*(" + num + ")", std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, ws)) slack = to_number(m[1]);
    if (!slack) {
      const std::regex checks("(" + num + ")\\s+slack\\s*\\((?:MET|VIOLATED)\\)");
      for (auto it = std::sregex_iterator(text.begin(), text.end(), checks);
           it != std::sregex_iterator(); ++it) {
        const auto v = to_number((*it)[1]);
        if (v && (!slack || *v < *slack)) slack = v;
      }
    }
  }
  if (!slack) throw ReportError("slack");

  return {*power, *area, effective_period(clock_period, *slack)};
}

std::string infer_top_module(std::string_view code) {
  const std::string text(code);
  const std::regex decl(R"(\bmodule\s+([A-Za-z_][A-Za-z0-9_$]*))");
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), decl); it != std::sregex_iterator();
       ++it) {
    names.push_back((*it)[1]);
  }
  if (names.empty()) return "top";
  for (const auto& name : names) {
    const std::regex inst("\\b" + name + R"(\s+(?:#\s*\([^;]*\)\s*)?[A-Za-z_][A-Za-z0-9_$]*\s*\()");
    if (!std::regex_search(text, inst)) return name;
  }
  return names.front();
}

ToolchainEvaluator::ToolchainEvaluator(ToolchainConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

void ToolchainEvaluator::precheck() const {
  const auto need = [](const std::string& tmpl, const char* field) {
    if (tmpl.empty()) return;
    const auto argv = expand_command(tmpl, {});
    if (!find_executable(argv.front())) {
      throw EnvironmentError("toolchain." + std::string(field) + ": executable '" +
                             argv.front() + "' not found");
    }
  };
  // Probing the program name only; placeholders never sit in argv[0].
  const auto program_only = [](const std::string& tmpl) {
    const auto sp = tmpl.find_first_of(" \t");
    return tmpl.substr(0, sp);
  };
  need(program_only(cfg_.simulator_command), "simulator_command");
  need(program_only(cfg_.sim_run_command), "sim_run_command");
  need(program_only(cfg_.synthesizer_command), "synthesizer_command");
  need(program_only(cfg_.sta_command), "sta_command");
  if (cfg_.post_synth_check) {
    need(program_only(cfg_.post_synth_sim_command), "post_synth_sim_command");
    need(program_only(cfg_.post_synth_run_command), "post_synth_run_command");
  }
  std::ifstream lib(cfg_.liberty_path);
  if (!lib) throw EnvironmentError("liberty file is not readable: " + cfg_.liberty_path.string());
}

std::map<std::string, std::string> ToolchainEvaluator::placeholders(
    const std::string& code, const std::filesystem::path& scratch) const {
  return {
      {"workdir", scratch.string()},
      {"code_file", (scratch / "design.v").string()},
      {"testbench_file", (scratch / "tb.v").string()},
      {"sim_bin", (scratch / "sim.out").string()},
      {"gl_bin", (scratch / "gl_sim.out").string()},
      {"script_file", (scratch / "synth.ys").string()},
      {"sta_script_file", (scratch / "sta.tcl").string()},
      {"out_report", (scratch / "synth_report.txt").string()},
      {"netlist_file", (scratch / "netlist.v").string()},
      {"liberty", cfg_.liberty_path.string()},
      {"cell_models", cfg_.cell_models.string()},
      {"clock_ns", fmt_double(cfg_.clock_period)},
      {"clock_ps", fmt_double(cfg_.clock_period * 1000.0)},
      {"top", cfg_.top_module.empty() ? infer_top_module(code) : cfg_.top_module},
  };
}

SimulationResult ToolchainEvaluator::simulate(const std::string& code, const ProblemSpec& spec,
                                              const std::filesystem::path& scratch) const {
  const auto values = placeholders(code, scratch);
  write_file(values.at("code_file"), code);
  write_file(values.at("testbench_file"), spec.testbench_source);

  SimulationResult r;
  const auto compile =
      run_stage("compile", cfg_.simulator_command, values, scratch, cfg_.per_stage_timeout_s, r.log);
  if (!compile.ok) return r;
  const auto run =
      run_stage("simulate", cfg_.sim_run_command, values, scratch, cfg_.per_stage_timeout_s, r.log);
  const std::regex pass(cfg_.sim_pass_pattern, std::regex::icase | std::regex::ECMAScript);
  r.passed = run.ok && std::regex_search(run.output, pass);
  if (run.ok && !r.passed) r.log += "no success token matched in simulator output\n";
  return r;
}

SynthesisResult ToolchainEvaluator::synthesize(const std::string& code,
                                               const std::filesystem::path& scratch) const {
  const auto values = placeholders(code, scratch);
  write_file(values.at("code_file"), code);
  write_file(values.at("script_file"), render_template(cfg_.synth_script, values));

  SynthesisResult r;
  const auto synth = run_stage("synthesize", cfg_.synthesizer_command, values, scratch,
                               cfg_.per_stage_timeout_s, r.log);
  if (!synth.ok) return r;
  r.report = read_file(values.at("out_report"));
  r.report += synth.output;
  if (!cfg_.sta_command.empty()) {
    write_file(values.at("sta_script_file"), render_template(cfg_.sta_script, values));
    const auto sta =
        run_stage("timing", cfg_.sta_command, values, scratch, cfg_.per_stage_timeout_s, r.log);
    if (!sta.ok) return r;
    r.report += sta.output;
  }
  r.succeeded = true;
  return r;
}

std::optional<bool> ToolchainEvaluator::post_synth_check(const std::string& code,
                                                         const std::filesystem::path& scratch,
                                                         std::string& log) const {
  if (!cfg_.post_synth_check) return std::nullopt;
  const auto values = placeholders(code, scratch);
  const auto compile = run_stage("gate-level compile", cfg_.post_synth_sim_command, values,
                                 scratch, cfg_.per_stage_timeout_s, log);
  if (!compile.ok) return false;
  const auto run = run_stage("gate-level simulate", cfg_.post_synth_run_command, values, scratch,
                             cfg_.per_stage_timeout_s, log);
  const std::regex pass(cfg_.sim_pass_pattern, std::regex::icase | std::regex::ECMAScript);
  return run.ok && std::regex_search(run.output, pass);
}

EvalOutcome ToolchainEvaluator::assess(const std::string& code, const ProblemSpec& spec,
                                       const std::filesystem::path& scratch) const {
  EvalOutcome out;
  auto sim = simulate(code, spec, scratch);
  out.sim_passed = sim.passed;
  out.sim_log = sim.log.empty() ? "(no simulator output)\n" : std::move(sim.log);
  if (!out.sim_passed) return out;

  auto synth = synthesize(code, scratch);
  out.synth_log = synth.log + synth.report;
  if (out.synth_log.empty()) out.synth_log = "(no synthesizer output)\n";
  if (!synth.succeeded) return out;
  try {
    out.ppa = parse_ppa_report(synth.report, cfg_.clock_period);
    out.synth_succeeded = true;
  } catch (const ReportError& e) {
    out.synth_log += std::string("report parse error: ") + e.what() + "\n";
    return out;
  }
  out.post_synth_functional = post_synth_check(code, scratch, out.synth_log);
  return out;
}

PpaMetrics ToolchainEvaluator::reference_ppa(const std::string& code, const ProblemSpec&,
                                             const std::filesystem::path& scratch) const {
  const auto synth = synthesize(code, scratch);
  if (!synth.succeeded) {
    throw Error("reference design failed to synthesize; the problem is not eligible for PPA "
                "comparison\n" + synth.log);
  }
  return parse_ppa_report(synth.report, cfg_.clock_period);
}

}  // namespace rtlevo
