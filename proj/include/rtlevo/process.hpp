#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlevo {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed or terminated by a signal
  bool timed_out = false;
  std::string output;  // stdout and stderr, interleaved
};

// Runs argv[0] (PATH lookup) in `cwd` with stdin closed. Kills the whole
// process group when `timeout` elapses. Throws EnvironmentError when the
// executable cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout);

// Splits a command template on whitespace (single and double quotes group
// words), then substitutes `{placeholder}` values inside each word. A value
// containing spaces stays one argument.
std::vector<std::string> expand_command(std::string_view tmpl,
                                        const std::map<std::string, std::string>& values);

// Resolves a program name against PATH; absolute and relative paths are
// checked directly.
std::optional<std::filesystem::path> find_executable(std::string_view name);

}  // namespace rtlevo
