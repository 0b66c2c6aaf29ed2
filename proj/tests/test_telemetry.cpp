#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "mobcity/telemetry.hpp"

using namespace mobcity;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

EventRecord sample_action() {
  EventRecord e;
  e.agent = 3;
  e.t = 512.25;  // fractional minutes must survive the round trip
  e.day = 2;
  e.kind = EventKind::ActionCompleted;
  e.action_id = "lunch-canteen";
  e.venue = "canteen-00";
  e.t_start = 498.5;
  e.needs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  e.feedback = 0.375;
  e.activity_class = "meals";
  e.mandatory = false;
  return e;
}

}  // namespace

TEST_CASE("every event kind round-trips through NDJSON exactly") {
  std::vector<EventRecord> events;

  events.push_back(sample_action());

  EventRecord mandatory = sample_action();
  mandatory.mandatory = true;
  mandatory.scheduled_start = 495.0;
  mandatory.action_id = "task:work";
  events.push_back(mandatory);

  EventRecord moved;
  moved.agent = 1;
  moved.t = 33.75;
  moved.day = 0;
  moved.kind = EventKind::Moved;
  moved.x = 17;
  moved.y = 42;
  moved.mode = Mode::Bus;
  events.push_back(moved);

  EventRecord conv;
  conv.agent = 4;
  conv.t = 700.0;
  conv.day = 0;
  conv.kind = EventKind::Conversation;
  conv.partner = 9;
  conv.delta_r = 0.05;
  conv.face_to_face = false;
  conv.venue = "";
  events.push_back(conv);

  EventRecord day_start;
  day_start.agent = 2;
  day_start.t = 0.0;
  day_start.kind = EventKind::DayStart;
  day_start.needs = {1, 1, 1, 1, 1, 1, 1, 1};
  events.push_back(day_start);

  EventRecord day_end = day_start;
  day_end.kind = EventKind::DayEnd;
  day_end.t = 1440.0;
  events.push_back(day_end);

  for (const EventRecord& e : events) {
    std::string line = to_ndjson_line(e);
    EventRecord back = from_ndjson_line(line);
    // Re-serializing must be byte-identical: that is the export contract.
    CHECK(to_ndjson_line(back) == line);
    CHECK(back.agent == e.agent);
    CHECK(back.t == e.t);
    CHECK(back.day == e.day);
    CHECK(back.kind == e.kind);
  }

  EventRecord back = from_ndjson_line(to_ndjson_line(events[1]));
  CHECK(back.scheduled_start == doctest::Approx(495.0));
  CHECK(back.needs == events[1].needs);
  back = from_ndjson_line(to_ndjson_line(moved));
  CHECK(back.x == 17);
  CHECK(back.mode == Mode::Bus);

  CHECK_THROWS(from_ndjson_line("{\"agent\": 1, \"t\": 0, \"day\": 0, \"kind\": \"nap\"}"));
  CHECK_THROWS(from_ndjson_line("not json"));
  CHECK_THROWS_AS(parse_event_kind("unknown"), std::runtime_error);
  for (int k = 0; k < 5; ++k) {
    CHECK(parse_event_kind(event_kind_name(static_cast<EventKind>(k))) ==
          static_cast<EventKind>(k));
  }
}

TEST_CASE("the file sink writes one line per event and import reads them back") {
  std::string path = temp_path("mobcity_events_test.ndjson");
  {
    NdjsonFileSink sink(path);
    sink.log(sample_action());
    EventRecord moved;
    moved.kind = EventKind::Moved;
    moved.agent = 1;
    moved.t = 5.0;
    sink.log(moved);
    sink.flush();
  }
  auto events = import_ndjson(path);
  REQUIRE(events.size() == 2);
  CHECK(events[0].action_id == "lunch-canteen");
  CHECK(events[1].kind == EventKind::Moved);

  // Blank lines are tolerated on import.
  {
    std::ofstream app(path, std::ios::app);
    app << "\n\n";
  }
  CHECK(import_ndjson(path).size() == 2);
  std::remove(path.c_str());

  // An empty log imports as an empty list.
  std::string empty = temp_path("mobcity_empty_test.ndjson");
  { NdjsonFileSink sink(empty); }
  CHECK(import_ndjson(empty).empty());
  std::remove(empty.c_str());

  CHECK_THROWS_AS(import_ndjson("/nonexistent/dir/log.ndjson"), std::runtime_error);
  CHECK_THROWS_AS(NdjsonFileSink("/nonexistent/dir/log.ndjson"), std::runtime_error);
}

TEST_CASE("the tee sink fans out to every attached sink") {
  MemorySink a, b;
  TeeSink tee;
  tee.attach(&a);
  tee.attach(&b);
  tee.log(sample_action());
  tee.flush();
  CHECK(a.events().size() == 1);
  CHECK(b.events().size() == 1);
}

TEST_CASE("the bulk sink posts batched action/document pairs") {
  httplib::Server server;
  std::atomic<int> posts{0};
  std::string last_body;
  std::string last_content_type;
  server.Post("/_bulk", [&](const httplib::Request& req, httplib::Response& res) {
    ++posts;
    last_body = req.body;
    last_content_type = req.get_header_value("Content-Type");
    res.set_content("{\"errors\":false}", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  std::string base = "http://127.0.0.1:" + std::to_string(port);

  {
    BulkHttpSink sink(base, "city-events", 2);
    sink.log(sample_action());
    CHECK(posts == 0);  // below the batch threshold
    sink.log(sample_action());
    CHECK(posts == 1);  // threshold reached
    sink.log(sample_action());
    sink.flush();  // tail batch of one
    CHECK(posts == 2);
  }
  CHECK(last_content_type == "application/x-ndjson");
  // One metadata line plus one document line per event.
  int newlines = 0;
  for (char c : last_body) newlines += c == '\n';
  CHECK(newlines == 2);
  CHECK(last_body.find("{\"index\":{\"_index\":\"city-events\"}}\n") == 0);
  CHECK(last_body.find("lunch-canteen") != std::string::npos);

  CHECK_THROWS_AS(BulkHttpSink(base, "x", 0), std::invalid_argument);
  server.stop();
  thread.join();
}

TEST_CASE("a persistently failing bulk endpoint gives up after three attempts") {
  httplib::Server server;
  std::atomic<int> posts{0};
  server.Post("/_bulk", [&](const httplib::Request&, httplib::Response& res) {
    ++posts;
    res.status = 503;
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BulkHttpSink sink("http://127.0.0.1:" + std::to_string(port), "x", 100);
  sink.log(sample_action());
  CHECK_THROWS_AS(sink.flush(), std::runtime_error);
  CHECK(posts == 3);
  // The destructor must swallow the final failed flush instead of throwing.

  server.stop();
  thread.join();
}
