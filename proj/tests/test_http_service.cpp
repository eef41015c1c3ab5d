#include <doctest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "test_util.hpp"
#include "tombandit/http_service.hpp"

using namespace tombandit;
using nlohmann::json;

namespace {

struct Running {
  SessionManager sessions;
  HttpService service;
  int port;
  std::thread thread;

  Running()
      : sessions(
            [] {
              std::map<std::string, Vocabulary> m;
              m.emplace("fixture", tombandit::testing::three_words());
              m.emplace("flat", Vocabulary({"x", "y"}, {{1, 1}, {1, 1}}));
              return m;
            }(),
            SessionStore(), UserModelSpec{UserKind::active, 0.0, 5.0, 1}),
        service(sessions),
        port(service.bind_any_port("127.0.0.1")) {
    REQUIRE(port > 0);
    thread = std::thread([this] { service.listen_after_bind(); });
    service.wait_until_ready();
  }

  ~Running() {
    service.stop();
    thread.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

void check_error(const httplib::Result& r, int status, const std::string& code) {
  REQUIRE(r);
  CHECK(r->status == status);
  const auto b = json::parse(r->body);
  CHECK(b["error_code"] == code);
  CHECK(b["message"].is_string());
  CHECK(b.size() == 2);
}

httplib::Result post(httplib::Client& c, const std::string& path, const json& body) {
  return c.Post(path, body.dump(), "application/json");
}

}  // namespace

TEST_CASE("health and vocabulary listing") {
  Running s;
  auto c = s.client();
  const auto h = c.Get("/healthz");
  REQUIRE(h);
  CHECK(h->status == 200);
  const auto v = c.Get("/v1/vocabularies");
  REQUIRE(v);
  CHECK(v->status == 200);
  CHECK(v->get_header_value("Content-Type") == "application/json");
  CHECK(body_of(v).dump().find("fixture") != std::string::npos);
}

TEST_CASE("a game played over HTTP") {
  Running s;
  auto c = s.client();
  const auto created = post(c, "/v1/sessions", {{"condition", "passive"}, {"vocabulary_id", "fixture"}, {"horizon", 3},
                                                {"target", "dog"}});
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto view = json::parse(created->body);
  const auto id = view["session_id"].get<std::string>();
  CHECK(view["status"] == "awaiting_question");
  CHECK(view["target"]["item_index"] == 1);
  CHECK(!view.contains("seed"));

  std::set<int> shown;
  for (int t = 1; t <= 3; ++t) {
    const auto q1 = body_of(c.Get("/v1/sessions/" + id + "/question"));
    const auto q2 = body_of(c.Get("/v1/sessions/" + id + "/question"));
    CHECK(q1 == q2);
    CHECK(q1["turn"] == t);
    shown.insert(q1["item_index"].get<int>());
    const auto a = post(c, "/v1/sessions/" + id + "/answer", {{"answer", q1["item_index"] == 1 ? 1 : 0}});
    REQUIRE(a);
    CHECK(a->status == 200);
    CHECK(json::parse(a->body)["turn"] == t);
  }
  CHECK(shown.size() == 3);
  const auto final_view = body_of(c.Get("/v1/sessions/" + id));
  CHECK(final_view["status"] == "finished");
  CHECK(final_view["events"].size() == 3);
  CHECK(final_view["cumulative_reward"].get<double>() == doctest::Approx(0.5 + 1.0 + 0.2));

  check_error(c.Get("/v1/sessions/" + id + "/question"), 409, "wrong_status");
  check_error(post(c, "/v1/sessions/" + id + "/answer", {{"answer", 1}}), 409, "wrong_status");
}

TEST_CASE("request errors use the uniform error body") {
  Running s;
  auto c = s.client();
  check_error(c.Post("/v1/sessions", "{not json", "application/json"), 400, "malformed_json");
  check_error(post(c, "/v1/sessions", {{"condition", "bogus"}, {"vocabulary_id", "fixture"}}), 422,
              "invalid_condition");
  check_error(post(c, "/v1/sessions", {{"condition", "active"}, {"vocabulary_id", "nope"}, {"horizon", 2}}), 404,
              "unknown_vocabulary");
  check_error(post(c, "/v1/sessions", {{"condition", "active"}, {"vocabulary_id", "fixture"}, {"horizon", 9}}), 422,
              "invalid_horizon");
  check_error(c.Get("/v1/sessions/abcdef"), 404, "unknown_session");
  check_error(c.Get("/v1/sessions/abcdef/question"), 404, "unknown_session");
  check_error(c.Get("/v1/nowhere"), 404, "not_found");

  const auto id =
      body_of(post(c, "/v1/sessions", {{"condition", "active"}, {"vocabulary_id", "fixture"}, {"horizon", 2}}))
          ["session_id"]
              .get<std::string>();
  check_error(post(c, "/v1/sessions/" + id + "/answer", {{"answer", 1}}), 409, "wrong_status");
  c.Get("/v1/sessions/" + id + "/question");
  check_error(post(c, "/v1/sessions/" + id + "/answer", {{"answer", 2}}), 422, "invalid_answer");
  check_error(post(c, "/v1/sessions/" + id + "/answer", {{"answer", "yes"}}), 422, "invalid_answer");
  check_error(c.Post("/v1/sessions/" + id + "/answer", "[]", "application/json"), 400, "malformed_json");
}

TEST_CASE("degenerate evidence is reported as an aborted session") {
  Running s;
  auto c = s.client();
  const auto id =
      body_of(post(c, "/v1/sessions", {{"condition", "passive"}, {"vocabulary_id", "flat"}, {"horizon", 2}}))
          ["session_id"]
              .get<std::string>();
  c.Get("/v1/sessions/" + id + "/question");
  const auto a = body_of(post(c, "/v1/sessions/" + id + "/answer", {{"answer", 0}}));
  CHECK(a["status"] == "aborted");
  CHECK(a["message"].is_string());
  check_error(c.Get("/v1/sessions/" + id + "/question"), 409, "wrong_status");
}

TEST_CASE("listen addresses") {
  CHECK(parse_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_listen_address("9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK_THROWS(parse_listen_address("host:port"));
  CHECK_THROWS(parse_listen_address("host:70000"));
}
