#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mobcity/http_backend.hpp"

using namespace mobcity;
using nlohmann::json;

namespace {

/// Catalog-independent fixture: actions live here so candidate pointers stay
/// valid for the lifetime of the test.
struct RequestFixture {
  ActionSpec rest;
  ActionSpec lunch;
  DecisionRequest request;

  RequestFixture() {
    rest.id = "rest-home";
    rest.name = "rest at home";
    rest.duration_min = 30;
    rest.contribution[1] = 0.3;  // energy
    lunch.id = "lunch-out";
    lunch.name = "lunch out";
    lunch.duration_min = 45;
    lunch.contribution[0] = 0.5;  // fullness

    request.agent_id = 1;
    request.local_time = 700.0;
    request.day_of_week = 2;
    request.persona_summary = "age 34, employed, medium income";
    request.category_code = 110;
    request.needs.fill(0.5);
    request.next_obligation_start = 1380.0;

    Candidate a;
    a.index = 0;
    a.action = &rest;
    a.venue_id = "home-0";
    a.score = 0.4;
    a.routes.push_back(walk_route(12.0));
    request.candidates.push_back(a);

    Candidate b;
    b.index = 1;
    b.action = &lunch;
    b.venue_id = "cafe-0";
    b.score = 0.9;
    b.routes.push_back(walk_route(40.0));
    RouteOption bus;
    bus.mode = Mode::Bus;
    bus.time_steps = 14.0;
    bus.money_cost = 3.0;
    bus.uses_vehicle = true;
    b.routes.push_back(bus);
    request.candidates.push_back(b);
  }

  static RouteOption walk_route(double steps) {
    RouteOption r;
    r.mode = Mode::Walking;
    r.time_steps = steps;
    r.money_cost = 0.0;
    r.uses_vehicle = false;
    return r;
  }
};

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit TestServer(httplib::Server::Handler handler) {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  RemoteBackendConfig config() const {
    RemoteBackendConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port);
    c.model = "test-model";
    c.max_retries = 1;
    return c;
  }
};

std::string completion_body(const std::string& content) {
  json doc;
  doc["choices"] = json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return doc.dump();
}

}  // namespace

TEST_CASE("chat_completion speaks the chat protocol at temperature zero") {
  json seen_body;
  std::string seen_auth;
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = json::parse(req.body);
    seen_auth = req.get_header_value("Authorization");
    res.set_content(completion_body("hello there"), "application/json");
  });

  RemoteBackendConfig config = server.config();
  config.api_key = "sk-test";
  CHECK(chat_completion(config, "say hi") == "hello there");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == 0);
  REQUIRE(seen_body["messages"].size() == 1);
  CHECK(seen_body["messages"][0]["role"] == "user");
  CHECK(seen_body["messages"][0]["content"] == "say hi");
  CHECK(seen_auth == "Bearer sk-test");

  // Without a key no Authorization header is sent.
  config.api_key.clear();
  chat_completion(config, "again");
  CHECK(seen_auth.empty());
}

TEST_CASE("chat_completion throws on bad statuses and malformed payloads") {
  std::atomic<int> mode{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    if (mode == 0) {
      res.status = 500;
    } else {
      res.set_content("{\"choices\":[]}", "application/json");
    }
  });
  CHECK_THROWS_AS(chat_completion(server.config(), "p"), std::runtime_error);
  mode = 1;
  CHECK_THROWS(chat_completion(server.config(), "p"));

  RemoteBackendConfig dead;
  dead.base_url = "http://127.0.0.1:1";  // nothing listens here
  dead.timeout_seconds = 1;
  CHECK_THROWS_AS(chat_completion(dead, "p"), std::runtime_error);
}

TEST_CASE("the remote decision backend parses well-formed replies verbatim") {
  RequestFixture fx;
  std::atomic<int> calls{0};
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    // The prompt must carry the option list the reply refers to.
    CHECK(json::parse(req.body)["messages"][0]["content"].get<std::string>().find(
              "lunch out") != std::string::npos);
    res.set_content(completion_body("1 2"), "application/json");
  });

  HttpDecisionBackend backend(server.config());
  auto out = backend.batch_decide({fx.request, fx.request});
  REQUIRE(out.size() == 2);
  for (const DecisionResponse& r : out) {
    CHECK(r.candidate == 1);
    CHECK(r.mode == Mode::Bus);
    CHECK_FALSE(r.fallback_used);
  }
  CHECK(calls == 2);  // one completion per request
}

TEST_CASE("transport failures and nonsense replies fall back to the mock policy") {
  RequestFixture fx;
  DecisionResponse expected = MockDecisionBackend::decide_one(fx.request, 7);

  std::atomic<int> calls{0};
  TestServer failing([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  HttpDecisionBackend backend(failing.config(), 7);
  auto out = backend.batch_decide({fx.request});
  REQUIRE(out.size() == 1);
  CHECK(out[0].fallback_used);
  CHECK(out[0].candidate == expected.candidate);
  CHECK(out[0].mode == expected.mode);
  CHECK(calls == 2);  // initial attempt plus one retry

  // A reply naming an infeasible mode is rejected, then served by the mock.
  TestServer nonsense([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("0 2"), "application/json");  // rest has no bus
  });
  HttpDecisionBackend backend2(nonsense.config(), 7);
  auto out2 = backend2.batch_decide({fx.request});
  CHECK(out2[0].fallback_used);
  CHECK(out2[0].candidate == expected.candidate);
}

TEST_CASE("conversation replies parse into id lists and a scaled delta") {
  ExchangeResult r = parse_comm_response("to_a: 1,2; to_b: 3; delta: 5");
  CHECK(r.to_a == std::vector<int>{1, 2});
  CHECK(r.to_b == std::vector<int>{3});
  CHECK(r.delta_r == doctest::Approx(0.05));

  r = parse_comm_response("to_a:; to_b:; delta: -20");
  CHECK(r.to_a.empty());
  CHECK(r.to_b.empty());
  CHECK(r.delta_r == doctest::Approx(-0.2));

  // Labels may arrive on separate lines with commentary around them.
  r = parse_comm_response("Sure!\nto_a: 4\nto_b: 6, 7\ndelta: 10\n");
  CHECK(r.to_a == std::vector<int>{4});
  CHECK(r.to_b == std::vector<int>{6, 7});
  CHECK(r.delta_r == doctest::Approx(0.1));

  CHECK_THROWS_AS(parse_comm_response("to_b: 3; delta: 5"), std::runtime_error);
  CHECK_THROWS_AS(parse_comm_response("to_a: 1; to_b: 2; delta:"), std::runtime_error);
  CHECK_THROWS_AS(parse_comm_response(""), std::runtime_error);
}

TEST_CASE("the remote conversation backend answers or degrades gracefully") {
  ConversationTask task;
  task.agent_a = 1;
  task.agent_b = 2;
  task.face_to_face = true;
  task.memory_a = {{0, "saw a movie"}};
  task.memory_b = {{0, "tried a new cafe"}, {1, "met a friend"}};

  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    CHECK(json::parse(req.body)["messages"][0]["content"].get<std::string>().find(
              "tried a new cafe") != std::string::npos);
    res.set_content(completion_body("to_a: 1; to_b: 0; delta: 8"), "application/json");
  });
  HttpCommBackend backend(server.config());
  auto out = backend.batch_communicate({task});
  REQUIRE(out.size() == 1);
  CHECK(out[0].to_a == std::vector<int>{1});
  CHECK(out[0].to_b == std::vector<int>{0});
  CHECK(out[0].delta_r == doctest::Approx(0.08));

  // On failure the exchange matches the deterministic mock: each side shares
  // its latest memory and the delta comes from the contact kind.
  TestServer failing([&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  HttpCommBackend backend2(failing.config());
  auto fallback = backend2.batch_communicate({task});
  REQUIRE(fallback.size() == 1);
  CHECK(fallback[0].to_a == std::vector<int>{1});
  CHECK(fallback[0].to_b == std::vector<int>{0});
  CHECK(fallback[0].delta_r == doctest::Approx(SocialParams{}.face_to_face_delta));
}
