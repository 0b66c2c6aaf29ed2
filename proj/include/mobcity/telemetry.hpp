#pragma once

#include <array>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "mobcity/needs.hpp"
#include "mobcity/transport.hpp"

namespace mobcity {

enum class EventKind : int { DayStart = 0, ActionCompleted, Moved, Conversation, DayEnd };
const char* event_kind_name(EventKind k);
EventKind parse_event_kind(const std::string& name);

/// One append-only state change. Per-agent timestamps are nondecreasing.
struct EventRecord {
  int agent = 0;
  double t = 0.0;  ///< absolute minute (day * 1440 + minute of day)
  int day = 0;
  EventKind kind = EventKind::ActionCompleted;

  // action_completed
  std::string action_id;
  std::string venue;
  double t_start = 0.0;
  NeedVector needs{};
  double feedback = 0.0;
  std::string activity_class;
  bool mandatory = false;
  double scheduled_start = -1.0;  ///< obligation start for mandatory actions

  // moved
  int x = 0;
  int y = 0;
  Mode mode = Mode::Walking;

  // conversation
  int partner = -1;
  double delta_r = 0.0;
  bool face_to_face = true;
};

std::string to_ndjson_line(const EventRecord& e);
EventRecord from_ndjson_line(const std::string& line);

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void log(const EventRecord& e) = 0;
  virtual void flush() {}
};

/// Keeps everything in memory; the analytics entry point.
class MemorySink : public EventSink {
 public:
  void log(const EventRecord& e) override { events_.push_back(e); }
  const std::vector<EventRecord>& events() const { return events_; }

 private:
  std::vector<EventRecord> events_;
};

/// One event per line, newline-delimited JSON.
class NdjsonFileSink : public EventSink {
 public:
  explicit NdjsonFileSink(const std::string& path);
  void log(const EventRecord& e) override;
  void flush() override;

 private:
  std::ofstream out_;
};

/// Fans out to several sinks.
class TeeSink : public EventSink {
 public:
  void attach(EventSink* sink) { sinks_.push_back(sink); }
  void log(const EventRecord& e) override {
    for (EventSink* s : sinks_) s->log(e);
  }
  void flush() override {
    for (EventSink* s : sinks_) s->flush();
  }

 private:
  std::vector<EventSink*> sinks_;
};

/// Search-engine bulk protocol: pairs of action-metadata and document lines,
/// POSTed to <base>/_bulk every `batch` events. Non-2xx responses are retried
/// three times before the export fails.
class BulkHttpSink : public EventSink {
 public:
  BulkHttpSink(std::string base_url, std::string index, size_t batch = 500);
  ~BulkHttpSink() override;
  void log(const EventRecord& e) override;
  void flush() override;

 private:
  void send();
  std::string base_url_;
  std::string index_;
  size_t batch_;
  std::vector<std::string> pending_;
};

std::vector<EventRecord> import_ndjson(const std::string& path);

}  // namespace mobcity
