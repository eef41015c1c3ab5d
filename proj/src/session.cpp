#include "tombandit/session.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "tombandit/rng.hpp"

namespace tombandit {

namespace {

using nlohmann::json;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

[[noreturn]] void corrupt(const SessionRecord& r, const std::string& why) {
  throw ServiceError(ErrorKind::internal, "corrupt_log", "session " + r.id + ": " + why);
}

[[noreturn]] void conflict(const SessionRecord& r, const std::string& what) {
  throw ServiceError(ErrorKind::conflict, "wrong_status",
                     what + " (session is " + std::string(to_string(r.status)) + ")");
}

int next_turn(const SessionRecord& r) { return static_cast<int>(r.events.size()) + 1; }

void apply_created(SessionRecord& r, const json& e, const Vocabulary& vocab) {
  r.id = e.at("session_id").get<std::string>();
  r.condition = condition_from_string(e.at("condition").get<std::string>());
  r.vocabulary_id = e.at("vocabulary_id").get<std::string>();
  r.horizon = e.at("horizon").get<int>();
  if (e.contains("target") && !e["target"].is_null()) r.target = e["target"].get<ItemIndex>();
  r.seed = e.at("seed").get<std::uint64_t>();
  r.model.kind = UserKind::active;
  r.model.epsilon = e.at("epsilon").get<double>();
  r.model.beta = e.at("beta").get<double>();
  r.model.depth = e.at("depth").get<int>();
  r.posterior = TargetPosterior::uniform(vocab.size());
  r.nested = r.posterior;
  r.asked = AskedSet(vocab.size());
  r.pending.reset();
  r.status = SessionStatus::awaiting_question;
  r.events.clear();
  r.created_ms = e.at("time").get<std::int64_t>();
}

void apply_question(SessionRecord& r, const json& e, const Vocabulary& vocab) {
  if (r.status != SessionStatus::awaiting_question) corrupt(r, "question entry while not awaiting a question");
  const int turn = e.at("turn").get<int>();
  const auto item = e.at("item").get<ItemIndex>();
  if (turn != next_turn(r)) corrupt(r, "question turn out of sequence");
  if (item >= vocab.size() || r.asked.contains(item)) corrupt(r, "question item invalid or repeated");
  r.pending = item;
  r.status = SessionStatus::awaiting_answer;
}

void apply_answer(SessionRecord& r, const json& e, const Vocabulary& vocab) {
  if (r.status != SessionStatus::awaiting_answer || !r.pending) corrupt(r, "answer entry without a pending question");
  const FeedbackEvent event{e.at("turn").get<int>(), e.at("item").get<ItemIndex>(), e.at("answer").get<int>()};
  if (event.turn != next_turn(r) || event.item != *r.pending) corrupt(r, "answer does not match pending question");
  validate_event(event, vocab);

  r.events.push_back(event);
  r.pending.reset();
  try {
    if (r.condition == Condition::active) {
      UserModelSpec spec = r.model;
      spec.kind = UserKind::active;
      r.posterior = belief_update(r.posterior, event, spec, vocab, r.asked, r.nested);
    } else if (r.condition == Condition::passive) {
      UserModelSpec spec = r.model;
      spec.kind = UserKind::passive;
      r.posterior = belief_update(r.posterior, event, spec, vocab, r.asked);
    }
    if (r.condition == Condition::active) {
      try {
        r.nested = passive_update(r.nested, event.item, event.answer, vocab, r.model.epsilon);
      } catch (const DegenerateEvidence&) {
      }
    }
  } catch (const DegenerateEvidence& err) {
    r.asked.insert(event.item);
    r.status = SessionStatus::aborted;
    r.abort_reason = std::string("degenerate evidence: ") + err.what();
    return;
  }
  r.asked.insert(event.item);
  r.status = static_cast<int>(r.events.size()) >= r.horizon ? SessionStatus::finished : SessionStatus::awaiting_question;
}

json top_words_json(const SessionRecord& r, const Vocabulary& vocab) {
  json out = json::array();
  for (const auto& [idx, p] : r.posterior.top_k(kTopWords)) out.push_back({{"word", vocab.item(idx)}, {"probability", p}});
  return out;
}

}  // namespace

int ServiceError::http_status() const {
  switch (kind_) {
    case ErrorKind::bad_request: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::validation: return 422;
    case ErrorKind::internal: return 500;
  }
  return 500;
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::awaiting_question: return "awaiting_question";
    case SessionStatus::awaiting_answer: return "awaiting_answer";
    case SessionStatus::finished: return "finished";
    case SessionStatus::aborted: return "aborted";
  }
  return "unknown";
}

void apply_log_entry(SessionRecord& record, const json& entry, const Vocabulary& vocab) {
  try {
    const auto type = entry.at("type").get<std::string>();
    if (type == "created") apply_created(record, entry, vocab);
    else if (type == "question") apply_question(record, entry, vocab);
    else if (type == "answer") apply_answer(record, entry, vocab);
    else corrupt(record, "unknown entry type '" + type + "'");
    record.updated_ms = entry.at("time").get<std::int64_t>();
  } catch (const json::exception& e) {
    corrupt(record, std::string("malformed entry: ") + e.what());
  }
}

ItemIndex choose_question(const SessionRecord& record, const Vocabulary& vocab) {
  Rng rng(derive_seed(record.seed, {static_cast<std::uint64_t>(next_turn(record))}));
  const auto policy = record.condition == Condition::random ? PolicyKind::random : PolicyKind::thompson;
  return select_item(policy, record.posterior, vocab, record.asked, rng);
}

json session_view(const SessionRecord& r, const Vocabulary& vocab) {
  json events = json::array();
  for (const auto& e : r.events) {
    events.push_back({{"turn", e.turn}, {"item_index", e.item}, {"word", vocab.item(e.item)}, {"answer", e.answer}});
  }
  json view = {{"session_id", r.id},
               {"condition", std::string(to_string(r.condition))},
               {"agency_level", agency_level(r.condition)},
               {"vocabulary_id", r.vocabulary_id},
               {"horizon", r.horizon},
               {"status", std::string(to_string(r.status))},
               {"turn", r.events.size()},
               {"events", events},
               {"posterior", std::vector<double>(r.posterior.probs().begin(), r.posterior.probs().end())},
               {"entropy", r.posterior.entropy()},
               {"top_words", top_words_json(r, vocab)},
               {"created_ms", r.created_ms},
               {"updated_ms", r.updated_ms}};
  if (r.pending) {
    view["pending"] = {{"turn", next_turn(r)}, {"item_index", *r.pending}, {"word", vocab.item(*r.pending)}};
  }
  if (r.target) {
    view["target"] = {{"item_index", *r.target}, {"word", vocab.item(*r.target)}};
    const auto curve = reward_curve(r.events, vocab, *r.target);
    view["reward_curve"] = curve;
    view["cumulative_reward"] = curve.empty() ? 0.0 : curve.back();
  }
  if (r.status == SessionStatus::aborted) view["abort_reason"] = r.abort_reason;
  return view;
}

std::string new_session_id() {
  std::random_device rd;
  std::string id;
  static constexpr char kHex[] = "0123456789abcdef";
  for (int word = 0; word < 4; ++word) {
    std::uint32_t bits = rd();
    for (int k = 0; k < 8; ++k) {
      id += kHex[bits & 0xf];
      bits >>= 4;
    }
  }
  return id;
}

SessionManager::SessionManager(std::map<std::string, Vocabulary> vocabularies, SessionStore store,
                               UserModelSpec model)
    : vocabularies_(std::move(vocabularies)), store_(std::move(store)), model_(model) {
  model_.kind = UserKind::active;
  model_.validate();
}

std::size_t SessionManager::recover() {
  std::size_t loaded = 0;
  for (auto& [id, entries] : store_.load_all()) {
    auto entry = std::make_shared<Entry>();
    entry->record.id = id;
    if (entries.empty()) continue;
    const auto vocab_id = entries.front().value("vocabulary_id", std::string());
    const auto& vocab = vocabulary(vocab_id);
    for (const auto& line : entries) apply_log_entry(entry->record, line, vocab);
    std::unique_lock lock(index_mutex_);
    sessions_[id] = std::move(entry);
    ++loaded;
  }
  return loaded;
}

const Vocabulary& SessionManager::vocabulary(const std::string& id) const {
  auto it = vocabularies_.find(id);
  if (it == vocabularies_.end()) throw ServiceError(ErrorKind::not_found, "unknown_vocabulary", "no vocabulary '" + id + "'");
  return it->second;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(index_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(ErrorKind::not_found, "unknown_session", "no session '" + id + "'");
  return it->second;
}

void SessionManager::commit(Entry& entry, json line) {
  const auto& vocab = vocabulary(entry.record.vocabulary_id);
  SessionRecord next = entry.record;
  apply_log_entry(next, line, vocab);
  store_.append(entry.record.id, line);
  entry.record = std::move(next);
}

SessionRecord SessionManager::create(const CreateSessionRequest& request) {
  const auto& vocab = vocabulary(request.vocabulary_id);
  if (request.horizon < 1 || static_cast<std::size_t>(request.horizon) > vocab.size()) {
    throw ServiceError(ErrorKind::validation, "invalid_horizon",
                       "horizon must lie in 1.." + std::to_string(vocab.size()) + " (items are never repeated)");
  }
  if (request.target && *request.target >= vocab.size()) {
    throw ServiceError(ErrorKind::validation, "invalid_target", "declared target out of range");
  }
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();

  auto entry = std::make_shared<Entry>();
  std::string id;
  json line = {{"type", "created"},
               {"condition", std::string(to_string(request.condition))},
               {"vocabulary_id", request.vocabulary_id},
               {"horizon", request.horizon},
               {"target", request.target ? json(*request.target) : json(nullptr)},
               {"seed", seed},
               {"epsilon", model_.epsilon},
               {"beta", model_.beta},
               {"depth", model_.depth},
               {"time", now_ms()}};
  for (;;) {
    id = new_session_id();
    std::shared_lock lock(index_mutex_);
    if (!sessions_.count(id)) break;
  }
  line["session_id"] = id;
  entry->record.id = id;
  entry->record.vocabulary_id = request.vocabulary_id;
  commit(*entry, std::move(line));
  {
    std::unique_lock lock(index_mutex_);
    if (!sessions_.emplace(id, entry).second) {
      throw ServiceError(ErrorKind::internal, "id_collision", "session id collision");
    }
  }
  return entry->record;
}

QuestionView SessionManager::next_question(const std::string& id) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  auto& r = entry->record;
  const auto& vocab = vocabulary(r.vocabulary_id);
  if (r.status == SessionStatus::awaiting_answer) return {next_turn(r), *r.pending, vocab.item(*r.pending)};
  if (r.status != SessionStatus::awaiting_question) conflict(r, "no further questions");
  const ItemIndex item = choose_question(r, vocab);
  commit(*entry, {{"type", "question"}, {"turn", next_turn(r)}, {"item", item}, {"time", now_ms()}});
  return {next_turn(entry->record), item, vocab.item(item)};
}

AnswerSummary SessionManager::submit_answer(const std::string& id, int answer) {
  if (answer != 0 && answer != 1) throw ServiceError(ErrorKind::validation, "invalid_answer", "answer must be 0 or 1");
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  auto& r = entry->record;
  if (r.status != SessionStatus::awaiting_answer) conflict(r, "no question is awaiting an answer");
  const auto& vocab = vocabulary(r.vocabulary_id);
  commit(*entry,
         {{"type", "answer"}, {"turn", next_turn(r)}, {"item", *r.pending}, {"answer", answer}, {"time", now_ms()}});

  AnswerSummary s;
  s.turn = static_cast<int>(r.events.size());
  s.status = r.status;
  s.entropy = r.posterior.entropy();
  for (const auto& [idx, p] : r.posterior.top_k(kTopWords)) s.top_words.push_back(vocab.item(idx));
  if (r.target) s.cumulative_reward = cumulative_reward(r.events, vocab, *r.target);
  if (r.status == SessionStatus::aborted) s.message = r.abort_reason;
  return s;
}

json SessionManager::view(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return session_view(entry->record, vocabulary(entry->record.vocabulary_id));
}

SessionRecord SessionManager::snapshot(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->record;
}

json SessionManager::vocabularies_json() const {
  json out = json::array();
  for (const auto& [id, vocab] : vocabularies_) {
    out.push_back({{"vocabulary_id", id}, {"size", vocab.size()}, {"items", vocab.items()}});
  }
  return out;
}

}  // namespace tombandit
