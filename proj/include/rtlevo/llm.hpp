#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rtlevo/prompts.hpp"

namespace rtlevo {

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct CompletionResult {
  std::string text;
  std::optional<TokenUsage> usage;
  double latency_s = 0.0;
  int attempt_count = 1;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;

  // Throws ProviderError or ScriptError; both abort a run.
  virtual CompletionResult complete(const PromptBundle& bundle) = 0;

  // True when a response depends only on the bundle, never on how many calls
  // came before. Order-dependent providers force serial offspring production.
  virtual bool order_independent() const noexcept { return true; }

  virtual std::string describe() const = 0;
};

// Deterministic FIFO script of (matcher, response) pairs. Each call consumes
// the first remaining entry whose matcher accepts the prompt.
class ScriptedProvider final : public LlmProvider {
 public:
  struct Matcher {
    enum class Kind { Any, Contains, Strategy, Purpose };
    Kind kind = Kind::Any;
    std::string value;

    bool accepts(const PromptBundle& b) const;
    static Matcher any() { return {Kind::Any, {}}; }
    static Matcher contains(std::string s) { return {Kind::Contains, std::move(s)}; }
    static Matcher strategy(PromptStrategy s) { return {Kind::Strategy, std::string(to_string(s))}; }
    static Matcher purpose(PromptPurpose p) { return {Kind::Purpose, std::string(to_string(p))}; }
  };

  struct Entry {
    Matcher matcher;
    std::string response;
  };

  // Throws UsageError for an empty script.
  explicit ScriptedProvider(std::vector<Entry> script);

  // JSON array of {"match": {"contains"|"strategy"|"purpose": "..."} or
  // "any", "response": "...", "repeat": n (optional, default 1)}.
  static std::unique_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

  CompletionResult complete(const PromptBundle& bundle) override;
  bool order_independent() const noexcept override { return false; }
  std::string describe() const override { return "scripted"; }

  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::deque<Entry> script_;
};

// Append-only JSON-lines log of every provider call.
class TranscriptLog {
 public:
  explicit TranscriptLog(const std::filesystem::path& path);

  // Strings to scrub from every record (API keys). Register them before the
  // first call.
  void add_secret(std::string secret);

  void record(const PromptBundle& bundle, const CompletionResult* result,
              const std::string* error, double latency_s);

  std::string redact(std::string s) const;

 private:

  std::mutex mu_;
  std::ofstream out_;
  std::vector<std::string> secrets_;
  std::uint64_t seq_ = 0;
};

// Decorator that writes each call, successful or not, to a TranscriptLog. The
// returned text is redacted too, so secrets echoed by a model stay out of the
// run records.
class RecordingProvider final : public LlmProvider {
 public:
  RecordingProvider(LlmProvider& inner, TranscriptLog& log) : inner_(inner), log_(log) {}

  CompletionResult complete(const PromptBundle& bundle) override;
  bool order_independent() const noexcept override { return inner_.order_independent(); }
  std::string describe() const override { return inner_.describe(); }

 private:
  LlmProvider& inner_;
  TranscriptLog& log_;
};

}  // namespace rtlevo
