#include "rtlevo/http_provider.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rtlevo/errors.hpp"
#include "rtlevo/rng.hpp"

namespace rtlevo {

using nlohmann::json;

struct HttpChatProvider::Endpoint {
  std::string scheme_host_port;
  std::string path;
};

void ProviderConfig::validate() const {
  const auto check = [](double t, double p, const char* what) {
    if (!(t >= 0.0)) throw ConfigError(std::string(what) + "temperature must be >= 0");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + "top_p must be in (0, 1]");
  };
  check(temperature, top_p, "provider.");
  check(feedback_temperature.value_or(temperature), feedback_top_p.value_or(top_p),
        "provider.feedback_");
  if (max_retries < 0) throw ConfigError("provider.max_retries must be >= 0");
  if (!(request_timeout_s > 0.0)) throw ConfigError("provider.request_timeout_s must be > 0");
  if (max_parallel_requests < 1 || max_parallel_requests > 1024) {
    throw ConfigError("provider.max_parallel_requests must be in [1, 1024]");
  }
  if (!(backoff_base_s >= 0.0)) throw ConfigError("provider.backoff_base_s must be >= 0");
  if (!(backoff_factor >= 1.0)) throw ConfigError("provider.backoff_factor must be >= 1");
  if (model_name.empty()) throw ConfigError("provider.model_name must be non-empty");
}

HttpChatProvider::HttpChatProvider(ProviderConfig cfg)
    : cfg_(std::move(cfg)), in_flight_(cfg_.max_parallel_requests) {
  cfg_.validate();
  if (!cfg_.api_key_env_var.empty()) {
    const char* key = std::getenv(cfg_.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + cfg_.api_key_env_var +
                        " (provider.api_key_env_var) is not set");
    }
    api_key_ = key;
  }
  static const std::regex url_re(R"(^(https?)://([^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint_url, m, url_re)) {
    throw ConfigError("provider.endpoint_url is not an http(s) URL: " + cfg_.endpoint_url);
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") throw ConfigError("this build has no TLS support; use an http:// endpoint");
#endif
  endpoint_ = std::make_unique<Endpoint>();
  endpoint_->scheme_host_port = std::string(m[1]) + "://" + std::string(m[2]);
  endpoint_->path = m[3].matched ? std::string(m[3]) : "/";
}

HttpChatProvider::~HttpChatProvider() = default;

namespace {

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

double jitter_factor() {
  thread_local Rng rng{std::random_device{}()};
  return 1.0 + 0.25 * uniform01(rng);
}

}  // namespace

CompletionResult HttpChatProvider::complete(const PromptBundle& bundle) {
  const bool feedback = bundle.purpose == PromptPurpose::Feedback;
  json body = {
      {"model", cfg_.model_name},
      {"messages",
       json::array({{{"role", "system"}, {"content", bundle.system_text}},
                    {{"role", "user"}, {"content", bundle.user_text}}})},
      {"temperature", feedback ? cfg_.feedback_temperature.value_or(cfg_.temperature)
                               : cfg_.temperature},
      {"top_p", feedback ? cfg_.feedback_top_p.value_or(cfg_.top_p) : cfg_.top_p},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto timeout = std::chrono::duration<double>(cfg_.request_timeout_s);
  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  const int max_attempts = cfg_.max_retries + 1;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    {
      SemaphoreGuard slot(in_flight_);
      httplib::Client client(endpoint_->scheme_host_port);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      auto res = client.Post(endpoint_->path, headers, payload, "application/json");

      if (!res) {
        last_error = "request failed: " + httplib::to_string(res.error());
      } else if (res->status >= 200 && res->status < 300) {
        CompletionResult out;
        try {
          const auto doc = json::parse(res->body);
          out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
          if (doc.contains("usage") && doc["usage"].is_object()) {
            out.usage = TokenUsage{doc["usage"].value("prompt_tokens", 0),
                                   doc["usage"].value("completion_tokens", 0)};
          }
        } catch (const json::exception& e) {
          throw ProviderError(ProviderErrorKind::Protocol,
                              std::string("malformed response body: ") + e.what(), attempt);
        }
        out.attempt_count = attempt;
        out.latency_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
      } else if (res->status == 401 || res->status == 403) {
        throw ProviderError(ProviderErrorKind::Auth,
                            "HTTP " + std::to_string(res->status) + " from endpoint", attempt);
      } else if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
      } else {
        throw ProviderError(ProviderErrorKind::Protocol,
                            "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500),
                            attempt);
      }
    }
    if (attempt < max_attempts) {
      const double delay =
          cfg_.backoff_base_s * std::pow(cfg_.backoff_factor, attempt - 1) * jitter_factor();
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
  throw ProviderError(ProviderErrorKind::Transient,
                      "gave up after " + std::to_string(max_attempts) + " attempts: " + last_error,
                      max_attempts);
}

}  // namespace rtlevo
