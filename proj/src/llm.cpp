#include "rtlevo/llm.hpp"

#include <chrono>

#include "json.hpp"
#include "rtlevo/errors.hpp"

namespace rtlevo {

using nlohmann::json;

bool ScriptedProvider::Matcher::accepts(const PromptBundle& b) const {
  switch (kind) {
    case Kind::Any: return true;
    case Kind::Contains:
      return b.user_text.find(value) != std::string::npos ||
             b.system_text.find(value) != std::string::npos;
    case Kind::Strategy: return b.strategy && to_string(*b.strategy) == value;
    case Kind::Purpose: return to_string(b.purpose) == value;
  }
  return false;
}

ScriptedProvider::ScriptedProvider(std::vector<Entry> script)
    : script_(script.begin(), script.end()) {
  if (script_.empty()) throw UsageError("scripted provider needs a non-empty script");
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read provider script " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("provider script " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ConfigError("provider script must be a JSON array");
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const auto where = "provider script entry " + std::to_string(i);
    if (!item.is_object() || !item.contains("response") || !item["response"].is_string()) {
      throw ConfigError(where + ": needs a string 'response'");
    }
    Matcher m = Matcher::any();
    if (item.contains("match")) {
      const auto& mj = item["match"];
      if (mj.is_string() && mj.get<std::string>() == "any") {
        m = Matcher::any();
      } else if (mj.is_object() && mj.size() == 1) {
        const auto& [key, val] = *mj.items().begin();
        if (!val.is_string()) throw ConfigError(where + ": matcher value must be a string");
        const auto v = val.get<std::string>();
        if (key == "contains") {
          m = Matcher::contains(v);
        } else if (key == "strategy") {
          const auto s = strategy_from_string(v);
          if (!s) throw ConfigError(where + ": unknown strategy '" + v + "'");
          m = Matcher::strategy(*s);
        } else if (key == "purpose") {
          if (v != "initial" && v != "evolutionary" && v != "feedback") {
            throw ConfigError(where + ": unknown purpose '" + v + "'");
          }
          m = {Matcher::Kind::Purpose, v};
        } else {
          throw ConfigError(where + ": unknown matcher '" + key + "'");
        }
      } else {
        throw ConfigError(where + ": 'match' must be \"any\" or a one-key object");
      }
    }
    const int repeat = item.value("repeat", 1);
    if (repeat < 1) throw ConfigError(where + ": 'repeat' must be >= 1");
    for (int r = 0; r < repeat; ++r) entries.push_back({m, item["response"].get<std::string>()});
  }
  return std::make_unique<ScriptedProvider>(std::move(entries));
}

CompletionResult ScriptedProvider::complete(const PromptBundle& bundle) {
  std::lock_guard lock(mu_);
  if (script_.empty()) throw ScriptError(ScriptErrorKind::Exhausted);
  for (auto it = script_.begin(); it != script_.end(); ++it) {
    if (!it->matcher.accepts(bundle)) continue;
    CompletionResult r;
    r.text = std::move(it->response);
    r.attempt_count = 1;
    script_.erase(it);
    return r;
  }
  throw ScriptError(ScriptErrorKind::Unmatched);
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size();
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path)
    : out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw EnvironmentError("cannot open transcript file " + path.string());
}

void TranscriptLog::add_secret(std::string secret) {
  if (secret.empty()) return;
  std::lock_guard lock(mu_);
  secrets_.push_back(std::move(secret));
}

std::string TranscriptLog::redact(std::string s) const {
  for (const auto& secret : secrets_) {
    for (auto pos = s.find(secret); pos != std::string::npos; pos = s.find(secret, pos)) {
      s.replace(pos, secret.size(), "[REDACTED]");
    }
  }
  return s;
}

void TranscriptLog::record(const PromptBundle& bundle, const CompletionResult* result,
                           const std::string* error, double latency_s) {
  std::lock_guard lock(mu_);
  json rec;
  rec["seq"] = seq_++;
  rec["purpose"] = to_string(bundle.purpose);
  rec["strategy"] = bundle.strategy ? json(to_string(*bundle.strategy)) : json(nullptr);
  rec["parent_ids"] = bundle.parent_ids;
  rec["system"] = redact(bundle.system_text);
  rec["user"] = redact(bundle.user_text);
  if (result) {
    rec["response"] = redact(result->text);
    rec["attempts"] = result->attempt_count;
    if (result->usage) {
      rec["usage"] = {{"prompt_tokens", result->usage->prompt_tokens},
                      {"completion_tokens", result->usage->completion_tokens}};
    }
  }
  if (error) rec["error"] = redact(*error);
  rec["latency_s"] = latency_s;
  out_ << rec.dump() << '\n';
  out_.flush();
}

CompletionResult RecordingProvider::complete(const PromptBundle& bundle) {
  const auto start = std::chrono::steady_clock::now();
  try {
    auto result = inner_.complete(bundle);
    result.text = log_.redact(std::move(result.text));
    log_.record(bundle, &result, nullptr, result.latency_s);
    return result;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log_.record(bundle, nullptr, &msg, elapsed);
    throw;
  }
}

}  // namespace rtlevo
