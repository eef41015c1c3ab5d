#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tombandit/bandit.hpp"
#include "tombandit/experiment.hpp"
#include "tombandit/user_model.hpp"
#include "tombandit/vocabulary.hpp"

namespace tombandit {

enum class ErrorKind { bad_request, not_found, conflict, validation, internal };

/// Error surfaced to service clients as {error_code, message}.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }
  int http_status() const;

 private:
  ErrorKind kind_;
  std::string code_;
};

enum class SessionStatus { awaiting_question, awaiting_answer, finished, aborted };

std::string_view to_string(SessionStatus s);

/// Full server-side state of one game. The state is a fold over the log
/// entries; nothing else is needed to rebuild it.
struct SessionRecord {
  std::string id;
  Condition condition = Condition::active;
  std::string vocabulary_id;
  int horizon = 20;
  std::optional<ItemIndex> target;
  std::uint64_t seed = 0;
  UserModelSpec model;

  TargetPosterior posterior = TargetPosterior::uniform(1);
  /// Passive belief standing in for the user's model of the system.
  TargetPosterior nested = TargetPosterior::uniform(1);
  AskedSet asked{1};
  std::optional<ItemIndex> pending;
  SessionStatus status = SessionStatus::awaiting_question;
  std::vector<FeedbackEvent> events;
  std::string abort_reason;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
};

/// Applies one persisted log entry. Entry types: created, question, answer.
void apply_log_entry(SessionRecord& record, const nlohmann::json& entry, const Vocabulary& vocab);

/// Item the session would show next; depends only on the record and turn.
ItemIndex choose_question(const SessionRecord& record, const Vocabulary& vocab);

/// Read-only view for clients; no seed or rng state.
nlohmann::json session_view(const SessionRecord& record, const Vocabulary& vocab);

/// Append-only per-session line-delimited JSON logs under a directory.
class SessionStore {
 public:
  /// Empty path keeps everything in memory only.
  explicit SessionStore(std::filesystem::path dir = {}, bool sync = true);

  bool persistent() const { return !dir_.empty(); }
  void append(const std::string& session_id, const nlohmann::json& entry);
  /// Every stored session's entries, by session id.
  std::map<std::string, std::vector<nlohmann::json>> load_all() const;

 private:
  std::filesystem::path dir_;
  bool sync_;
};

struct CreateSessionRequest {
  Condition condition = Condition::active;
  std::string vocabulary_id;
  int horizon = 20;
  std::optional<ItemIndex> target;
};

struct QuestionView {
  int turn = 0;
  ItemIndex item = 0;
  std::string word;
};

struct AnswerSummary {
  int turn = 0;
  SessionStatus status = SessionStatus::awaiting_question;
  double entropy = 0.0;
  std::vector<std::string> top_words;
  std::optional<double> cumulative_reward;
  std::string message;
};

inline constexpr std::size_t kTopWords = 5;

/// Sessions for the game service. Operations on one session are serialised;
/// different sessions never wait on each other beyond the index lookup.
class SessionManager {
 public:
  SessionManager(std::map<std::string, Vocabulary> vocabularies, SessionStore store, UserModelSpec model);

  /// Rebuilds sessions from the store; returns how many were loaded.
  std::size_t recover();

  SessionRecord create(const CreateSessionRequest& request);
  QuestionView next_question(const std::string& id);
  AnswerSummary submit_answer(const std::string& id, int answer);
  nlohmann::json view(const std::string& id) const;
  /// Internal snapshot, including the seed (tests and tooling).
  SessionRecord snapshot(const std::string& id) const;

  nlohmann::json vocabularies_json() const;
  const Vocabulary& vocabulary(const std::string& id) const;
  const UserModelSpec& model() const { return model_; }

 private:
  struct Entry {
    mutable std::mutex mutex;
    SessionRecord record;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void commit(Entry& entry, nlohmann::json line);

  std::map<std::string, Vocabulary> vocabularies_;
  SessionStore store_;
  UserModelSpec model_;
  mutable std::shared_mutex index_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

/// 128 random bits as 32 lowercase hex characters.
std::string new_session_id();

}  // namespace tombandit
