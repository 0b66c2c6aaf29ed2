#pragma once

#include <string>
#include <vector>

#include "mobcity/decision.hpp"
#include "mobcity/social.hpp"

namespace mobcity {

struct RemoteBackendConfig {
  std::string base_url = "http://localhost:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string api_key;  ///< sent as a bearer token when nonempty
  int timeout_seconds = 30;
  int max_retries = 2;  ///< retries per request before the mock fallback
};

/// Decision backend speaking the OpenAI-compatible chat-completions protocol
/// at temperature 0. Each request becomes one completion call; transport or
/// parse failures after the retry budget fall back to the deterministic mock
/// policy for that request, so a run always completes.
class HttpDecisionBackend : public DecisionBackend {
 public:
  explicit HttpDecisionBackend(RemoteBackendConfig config, uint64_t fallback_seed = 0);
  std::vector<DecisionResponse> batch_decide(
      const std::vector<DecisionRequest>& requests) override;

 private:
  RemoteBackendConfig config_;
  uint64_t fallback_seed_;
};

/// Conversation backend over the same protocol: the model answers with three
/// comma-separated integer lists (memory ids shared to each side and the
/// relationship delta scaled by 100). Failures fall back to the mock exchange.
class HttpCommBackend : public CommBackend {
 public:
  HttpCommBackend(RemoteBackendConfig config, SocialParams social = {});
  std::vector<ExchangeResult> batch_communicate(
      const std::vector<ConversationTask>& tasks) override;

 private:
  RemoteBackendConfig config_;
  SocialParams social_;
};

/// One chat-completion round trip; returns the assistant text. Throws on
/// transport errors, non-2xx statuses, or malformed payloads.
std::string chat_completion(const RemoteBackendConfig& config, const std::string& prompt);

/// Parse the conversation reply format: three lines or semicolon-separated
/// groups "to_a: 1,2", "to_b: 3", "delta: 5" (delta in hundredths).
ExchangeResult parse_comm_response(const std::string& text);

}  // namespace mobcity
