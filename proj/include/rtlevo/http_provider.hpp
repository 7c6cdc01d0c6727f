#pragma once

#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include "rtlevo/llm.hpp"

namespace rtlevo {

struct ProviderConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4.1-mini";
  // Name of the environment variable holding the key; the key itself never
  // appears in configuration. Empty means no Authorization header.
  std::string api_key_env_var = "OPENAI_API_KEY";
  double temperature = 1.0;
  double top_p = 0.95;
  // Sampling overrides for feedback-generation calls.
  std::optional<double> feedback_temperature;
  std::optional<double> feedback_top_p;
  int max_retries = 3;
  double request_timeout_s = 120.0;
  int max_parallel_requests = 4;
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;

  void validate() const;
};

// Chat-completion client: POST {model, messages, temperature, top_p} and read
// choices[0].message.content. Retries 429/5xx/timeouts with jittered
// exponential backoff; 401/403 fail immediately.
class HttpChatProvider final : public LlmProvider {
 public:
  // Throws ConfigError when the key variable is named but unset, or the URL
  // is unusable.
  explicit HttpChatProvider(ProviderConfig cfg);
  ~HttpChatProvider() override;

  CompletionResult complete(const PromptBundle& bundle) override;
  std::string describe() const override { return "http:" + cfg_.model_name; }

  // Needed by transcript redaction.
  const std::string& api_key() const noexcept { return api_key_; }

 private:
  struct Endpoint;

  ProviderConfig cfg_;
  std::string api_key_;
  std::unique_ptr<Endpoint> endpoint_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace rtlevo
