#include "mobcity/telemetry.hpp"

#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mobcity {

namespace {
constexpr const char* kKindNames[] = {"day_start", "action_completed", "moved", "conversation",
                                      "day_end"};
}

const char* event_kind_name(EventKind k) { return kKindNames[static_cast<int>(k)]; }

EventKind parse_event_kind(const std::string& name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kKindNames[i]) return static_cast<EventKind>(i);
  }
  throw std::runtime_error("unknown event kind: " + name);
}

std::string to_ndjson_line(const EventRecord& e) {
  nlohmann::json j;
  j["agent"] = e.agent;
  j["t"] = e.t;
  j["day"] = e.day;
  j["kind"] = event_kind_name(e.kind);
  switch (e.kind) {
    case EventKind::ActionCompleted:
      j["action"] = e.action_id;
      j["venue"] = e.venue;
      j["t_start"] = e.t_start;
      j["needs"] = e.needs;
      j["feedback"] = e.feedback;
      j["class"] = e.activity_class;
      j["mandatory"] = e.mandatory;
      if (e.mandatory) j["scheduled_start"] = e.scheduled_start;
      break;
    case EventKind::Moved:
      j["x"] = e.x;
      j["y"] = e.y;
      j["mode"] = static_cast<int>(e.mode);
      break;
    case EventKind::Conversation:
      j["partner"] = e.partner;
      j["delta_r"] = e.delta_r;
      j["face_to_face"] = e.face_to_face;
      j["venue"] = e.venue;
      break;
    case EventKind::DayStart:
    case EventKind::DayEnd:
      j["needs"] = e.needs;
      break;
  }
  return j.dump();
}

EventRecord from_ndjson_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  EventRecord e;
  e.agent = j.at("agent").get<int>();
  e.t = j.at("t").get<double>();
  e.day = j.at("day").get<int>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  switch (e.kind) {
    case EventKind::ActionCompleted:
      e.action_id = j.at("action").get<std::string>();
      e.venue = j.at("venue").get<std::string>();
      e.t_start = j.at("t_start").get<double>();
      e.needs = j.at("needs").get<NeedVector>();
      e.feedback = j.at("feedback").get<double>();
      e.activity_class = j.at("class").get<std::string>();
      e.mandatory = j.at("mandatory").get<bool>();
      if (e.mandatory) e.scheduled_start = j.at("scheduled_start").get<double>();
      break;
    case EventKind::Moved:
      e.x = j.at("x").get<int>();
      e.y = j.at("y").get<int>();
      e.mode = static_cast<Mode>(j.at("mode").get<int>());
      break;
    case EventKind::Conversation:
      e.partner = j.at("partner").get<int>();
      e.delta_r = j.at("delta_r").get<double>();
      e.face_to_face = j.at("face_to_face").get<bool>();
      e.venue = j.at("venue").get<std::string>();
      break;
    case EventKind::DayStart:
    case EventKind::DayEnd:
      e.needs = j.at("needs").get<NeedVector>();
      break;
  }
  return e;
}

NdjsonFileSink::NdjsonFileSink(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open event log for writing: " + path);
}

void NdjsonFileSink::log(const EventRecord& e) { out_ << to_ndjson_line(e) << '\n'; }

void NdjsonFileSink::flush() { out_.flush(); }

BulkHttpSink::BulkHttpSink(std::string base_url, std::string index, size_t batch)
    : base_url_(std::move(base_url)), index_(std::move(index)), batch_(batch) {
  if (batch_ == 0) throw std::invalid_argument("bulk sink batch size must be positive");
}

BulkHttpSink::~BulkHttpSink() {
  try {
    flush();
  } catch (...) {
    // Destructors must not throw; a final failed flush loses the tail batch.
  }
}

void BulkHttpSink::log(const EventRecord& e) {
  pending_.push_back(to_ndjson_line(e));
  if (pending_.size() >= batch_) send();
}

void BulkHttpSink::flush() {
  if (!pending_.empty()) send();
}

void BulkHttpSink::send() {
  std::string body;
  const std::string action = "{\"index\":{\"_index\":\"" + index_ + "\"}}\n";
  for (const std::string& doc : pending_) {
    body += action;
    body += doc;
    body += '\n';
  }
  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto res = client.Post("/_bulk", body, "application/x-ndjson");
    if (res && res->status >= 200 && res->status < 300) {
      pending_.clear();
      return;
    }
    if (attempt < 2) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
  }
  throw std::runtime_error("bulk export failed after 3 attempts: " + base_url_);
}

std::vector<EventRecord> import_ndjson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(from_ndjson_line(line));
  }
  return out;
}

}  // namespace mobcity
