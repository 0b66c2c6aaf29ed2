#include "mobcity/http_backend.hpp"

#include <cctype>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace mobcity {

std::string chat_completion(const RemoteBackendConfig& config, const std::string& prompt) {
  httplib::Client client(config.base_url);
  client.set_connection_timeout(config.timeout_seconds);
  client.set_read_timeout(config.timeout_seconds);
  httplib::Headers headers;
  if (!config.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config.api_key);
  }
  nlohmann::json body = {
      {"model", config.model},
      {"temperature", 0},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  auto res = client.Post(config.path, headers, body.dump(), "application/json");
  if (!res) throw std::runtime_error("chat completion transport failure");
  if (res->status < 200 || res->status >= 300) {
    throw std::runtime_error("chat completion HTTP " + std::to_string(res->status));
  }
  nlohmann::json doc = nlohmann::json::parse(res->body);
  return doc.at("choices").at(0).at("message").at("content").get<std::string>();
}

namespace {

std::string completion_with_retries(const RemoteBackendConfig& config,
                                    const std::string& prompt) {
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    try {
      return chat_completion(config, prompt);
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw std::runtime_error("remote backend exhausted retries: " + last_error);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (size_t i = 0; i < text.size();) {
    bool neg = text[i] == '-' && i + 1 < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (neg || std::isdigit(static_cast<unsigned char>(text[i]))) {
      size_t j = i + (neg ? 1 : 0);
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back(std::stoi(text.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

/// Substring between a label and the next label / end of text.
std::string section(const std::string& text, const std::string& label,
                    const std::vector<std::string>& all_labels) {
  size_t pos = text.find(label);
  if (pos == std::string::npos) throw std::runtime_error("comm reply missing " + label);
  pos += label.size();
  size_t end = text.size();
  for (const std::string& other : all_labels) {
    size_t p = text.find(other, pos);
    if (p != std::string::npos && p < end) end = p;
  }
  return text.substr(pos, end - pos);
}

}  // namespace

ExchangeResult parse_comm_response(const std::string& text) {
  const std::vector<std::string> labels = {"to_a", "to_b", "delta"};
  ExchangeResult r;
  r.to_a = parse_int_list(section(text, "to_a", labels));
  r.to_b = parse_int_list(section(text, "to_b", labels));
  std::vector<int> delta = parse_int_list(section(text, "delta", labels));
  if (delta.empty()) throw std::runtime_error("comm reply missing delta value");
  r.delta_r = delta.front() / 100.0;
  return r;
}

HttpDecisionBackend::HttpDecisionBackend(RemoteBackendConfig config, uint64_t fallback_seed)
    : config_(std::move(config)), fallback_seed_(fallback_seed) {}

std::vector<DecisionResponse> HttpDecisionBackend::batch_decide(
    const std::vector<DecisionRequest>& requests) {
  std::vector<DecisionResponse> out;
  out.reserve(requests.size());
  for (const DecisionRequest& req : requests) {
    try {
      out.push_back(parse_response(completion_with_retries(config_, build_prompt(req)), req));
    } catch (const std::exception&) {
      DecisionResponse fallback = MockDecisionBackend::decide_one(req, fallback_seed_);
      fallback.fallback_used = true;
      out.push_back(fallback);
    }
  }
  return out;
}

HttpCommBackend::HttpCommBackend(RemoteBackendConfig config, SocialParams social)
    : config_(std::move(config)), social_(social) {}

namespace {

std::string comm_prompt(const ConversationTask& task) {
  nlohmann::json j;
  j["kind"] = task.face_to_face ? "face-to-face" : "virtual";
  auto dump = [](const std::vector<std::pair<int, std::string>>& mem) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, text] : mem) out.push_back({{"id", id}, {"text", text}});
    return out;
  };
  j["memories_a"] = dump(task.memory_a);
  j["memories_b"] = dump(task.memory_b);
  std::string prompt =
      "Two acquaintances talk. Their recent memories are listed below with ids.\n" + j.dump() +
      "\nPick which memory ids B tells A (to_a), which A tells B (to_b), and how the "
      "relationship changes in hundredths between -20 and 20 (delta).\n"
      "Answer exactly as: to_a: <ids>; to_b: <ids>; delta: <int>\n";
  return prompt;
}

ExchangeResult mock_exchange(const ConversationTask& task, const SocialParams& social) {
  ExchangeResult r;
  r.delta_r = task.face_to_face ? social.face_to_face_delta : social.virtual_delta;
  if (!task.memory_b.empty()) r.to_a.push_back(task.memory_b.back().first);
  if (!task.memory_a.empty()) r.to_b.push_back(task.memory_a.back().first);
  return r;
}

}  // namespace

std::vector<ExchangeResult> HttpCommBackend::batch_communicate(
    const std::vector<ConversationTask>& tasks) {
  std::vector<ExchangeResult> out;
  out.reserve(tasks.size());
  for (const ConversationTask& task : tasks) {
    try {
      out.push_back(parse_comm_response(completion_with_retries(config_, comm_prompt(task))));
    } catch (const std::exception&) {
      out.push_back(mock_exchange(task, social_));
    }
  }
  return out;
}

}  // namespace mobcity
