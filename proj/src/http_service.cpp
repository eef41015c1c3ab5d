#include "tombandit/http_service.hpp"

#include <httplib.h>

#include <stdexcept>

namespace tombandit {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error_code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw ServiceError(ErrorKind::bad_request, "malformed_json", "request body must be a JSON object");
  }
  return body;
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.http_status(), e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

CreateSessionRequest create_request(const json& body, const SessionManager& sessions) {
  CreateSessionRequest req;
  try {
    if (!body.contains("condition") || !body["condition"].is_string()) {
      throw ServiceError(ErrorKind::validation, "invalid_condition", "condition is required");
    }
    try {
      req.condition = condition_from_string(body["condition"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ServiceError(ErrorKind::validation, "invalid_condition", e.what());
    }
    if (!body.contains("vocabulary_id") || !body["vocabulary_id"].is_string()) {
      throw ServiceError(ErrorKind::validation, "invalid_vocabulary", "vocabulary_id is required");
    }
    req.vocabulary_id = body["vocabulary_id"].get<std::string>();
    if (body.contains("horizon")) {
      if (!body["horizon"].is_number_integer()) {
        throw ServiceError(ErrorKind::validation, "invalid_horizon", "horizon must be an integer");
      }
      req.horizon = body["horizon"].get<int>();
    }
    if (body.contains("target") && !body["target"].is_null()) {
      const auto& t = body["target"];
      if (t.is_number_unsigned()) {
        req.target = t.get<ItemIndex>();
      } else if (t.is_string()) {
        const auto& vocab = sessions.vocabulary(req.vocabulary_id);
        req.target = vocab.find(t.get<std::string>());
        if (!req.target) throw ServiceError(ErrorKind::validation, "invalid_target", "target word not in vocabulary");
      } else {
        throw ServiceError(ErrorKind::validation, "invalid_target", "target must be a word or an item index");
      }
    }
  } catch (const json::exception& e) {
    throw ServiceError(ErrorKind::validation, "invalid_request", e.what());
  }
  return req;
}

}  // namespace

struct HttpService::Impl {
  SessionManager& sessions;
  httplib::Server server;

  explicit Impl(SessionManager& s) : sessions(s) {}
};

HttpService::HttpService(SessionManager& sessions, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(sessions)) {
  auto& srv = impl_->server;
  auto& mgr = impl_->sessions;

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

  srv.Get("/v1/vocabularies", guarded([&mgr](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, mgr.vocabularies_json());
          }));

  srv.Post("/v1/sessions", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
             const auto record = mgr.create(create_request(parse_body(req), mgr));
             send_json(res, 201, mgr.view(record.id));
           }));

  srv.Get(R"(/v1/sessions/([0-9a-f]+)/question)",
          guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
            const auto q = mgr.next_question(req.matches[1]);
            send_json(res, 200, {{"turn", q.turn}, {"item_index", q.item}, {"word", q.word}});
          }));

  srv.Post(R"(/v1/sessions/([0-9a-f]+)/answer)",
           guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             if (!body.contains("answer") || !body["answer"].is_number_integer()) {
               throw ServiceError(ErrorKind::validation, "invalid_answer", "answer must be 0 or 1");
             }
             const auto raw = body["answer"].get<long long>();
             const int answer = (raw == 0 || raw == 1) ? static_cast<int>(raw) : -1;
             const auto s = mgr.submit_answer(req.matches[1], answer);
             json out = {{"turn", s.turn},
                         {"status", std::string(to_string(s.status))},
                         {"entropy", s.entropy},
                         {"top_words", s.top_words}};
             if (s.cumulative_reward) out["cumulative_reward"] = *s.cumulative_reward;
             if (!s.message.empty()) out["message"] = s.message;
             send_json(res, 200, out);
           }));

  srv.Get(R"(/v1/sessions/([0-9a-f]+))", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, mgr.view(req.matches[1]));
          }));

  if (!static_dir.empty()) {
    if (!srv.set_mount_point("/", static_dir.string())) {
      throw std::invalid_argument("static directory " + static_dir.string() + " does not exist");
    }
  }

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const std::string code = res.status == 404 ? "not_found" : "http_" + std::to_string(res.status);
      send_error(res, res.status, code, "no such resource");
    }
  });
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  std::string host = colon == std::string::npos ? "0.0.0.0" : address.substr(0, colon);
  const std::string port_text = colon == std::string::npos ? address : address.substr(colon + 1);
  if (host.empty()) host = "0.0.0.0";
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("bad listen address '" + address + "', expected host:port");
  }
  return {host, port};
}

}  // namespace tombandit
