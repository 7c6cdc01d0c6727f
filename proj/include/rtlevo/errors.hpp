#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtlevo {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (unknown strategy, arity mismatch, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The host environment cannot run the requested flow (missing executable,
// unreadable liberty file). Aborts a run; never absorbed into an individual.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class ReportError : public Error {
 public:
  explicit ReportError(std::string field)
      : Error("PPA report is missing or has an invalid '" + field + "' field"),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ParseErrorKind { NoCode, EmptyCode };

std::string_view to_string(ParseErrorKind kind) noexcept;

class ParseError : public Error {
 public:
  explicit ParseError(ParseErrorKind kind)
      : Error("cannot parse model response: " + std::string(to_string(kind))), kind_(kind) {}

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

enum class ProviderErrorKind { Transient, Auth, Protocol };

std::string_view to_string(ProviderErrorKind kind) noexcept;

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, std::string message, int attempts)
      : Error("provider error (" + std::string(to_string(kind)) + "): " + message),
        kind_(kind),
        attempts_(attempts) {}

  ProviderErrorKind kind() const noexcept { return kind_; }
  int attempt_count() const noexcept { return attempts_; }

 private:
  ProviderErrorKind kind_;
  int attempts_;
};

enum class ScriptErrorKind { Unmatched, Exhausted };

std::string_view to_string(ScriptErrorKind kind) noexcept;

class ScriptError : public Error {
 public:
  explicit ScriptError(ScriptErrorKind kind)
      : Error("scripted provider: " + std::string(to_string(kind))), kind_(kind) {}

  ScriptErrorKind kind() const noexcept { return kind_; }

 private:
  ScriptErrorKind kind_;
};

}  // namespace rtlevo
