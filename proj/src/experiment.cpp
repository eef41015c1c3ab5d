#include "tombandit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "tombandit/rng.hpp"
#include "tombandit/simulated_user.hpp"
#include "tombandit/stats.hpp"

namespace tombandit {

namespace {

constexpr std::uint64_t kUserStream = 1;
constexpr std::uint64_t kSystemStream = 2;
constexpr std::uint64_t kTargetStream = 3;
constexpr std::uint64_t kBandStream = 4;
constexpr std::uint64_t kCompareStream = 5;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

UserModelSpec system_model(const ExperimentConfig& config, UserKind kind) {
  UserModelSpec spec = config.user;
  spec.kind = kind;
  return spec;
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::active: return "active";
    case Condition::passive: return "passive";
    case Condition::random: return "random";
  }
  return "unknown";
}

Condition condition_from_string(std::string_view name) {
  if (name == "active") return Condition::active;
  if (name == "passive") return Condition::passive;
  if (name == "random") return Condition::random;
  throw std::invalid_argument("unknown condition '" + std::string(name) + "'");
}

int agency_level(Condition c) {
  switch (c) {
    case Condition::active: return 4;
    case Condition::passive: return 2;
    case Condition::random: return 0;
  }
  return 0;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (conditions.empty()) throw std::invalid_argument("at least one condition is required");
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (std::size_t j = i + 1; j < conditions.size(); ++j) {
      if (conditions[i] == conditions[j]) throw std::invalid_argument("conditions must be distinct");
    }
  }
  if (episodes_per_target < 1) throw std::invalid_argument("episodes per target must be >= 1");
  if (targets.empty() && n_targets < 1) throw std::invalid_argument("at least one target is required");
  user.validate();
}

void ExperimentConfig::validate(const Vocabulary& vocab) const {
  validate();
  if (static_cast<std::size_t>(horizon) > vocab.size()) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds vocabulary size " +
                                std::to_string(vocab.size()) + " (items are never repeated)");
  }
  for (auto t : targets) {
    if (t >= vocab.size()) throw std::invalid_argument("target " + std::to_string(t) + " out of range");
  }
  if (targets.empty() && n_targets > vocab.size()) {
    throw std::invalid_argument("cannot sample " + std::to_string(n_targets) + " distinct targets from " +
                                std::to_string(vocab.size()) + " items");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json conds = nlohmann::json::array();
  for (auto c : conditions) conds.push_back(std::string(to_string(c)));
  return {
      {"vocab", vocab_path},
      {"vocab_size", vocab_gen.n},
      {"dim", vocab_gen.dim},
      {"sharpness", vocab_gen.sharpness},
      {"vocab_seed", vocab_gen.seed},
      {"horizon", horizon},
      {"conditions", conds},
      {"user_kind", std::string(to_string(user.kind))},
      {"epsilon", user.epsilon},
      {"beta", user.beta},
      {"depth", user.depth},
      {"targets", targets},
      {"n_targets", n_targets},
      {"episodes", episodes_per_target},
      {"seed", seed},
      {"bootstrap_resamples", bootstrap_resamples},
      {"paired_seeding", paired_seeding},
  };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.vocab_path = doc.value("vocab", c.vocab_path);
    c.vocab_gen.n = doc.value("vocab_size", c.vocab_gen.n);
    c.vocab_gen.dim = doc.value("dim", c.vocab_gen.dim);
    c.vocab_gen.sharpness = doc.value("sharpness", c.vocab_gen.sharpness);
    c.vocab_gen.seed = doc.value("vocab_seed", c.vocab_gen.seed);
    c.horizon = doc.value("horizon", c.horizon);
    if (doc.contains("conditions")) {
      c.conditions.clear();
      for (const auto& name : doc["conditions"]) c.conditions.push_back(condition_from_string(name.get<std::string>()));
    }
    if (doc.contains("user_kind")) c.user.kind = user_kind_from_string(doc["user_kind"].get<std::string>());
    c.user.epsilon = doc.value("epsilon", c.user.epsilon);
    c.user.beta = doc.value("beta", c.user.beta);
    c.user.depth = doc.value("depth", c.user.depth);
    if (doc.contains("targets")) c.targets = doc["targets"].get<std::vector<ItemIndex>>();
    c.n_targets = doc.value("n_targets", c.n_targets);
    c.episodes_per_target = doc.value("episodes", c.episodes_per_target);
    c.seed = doc.value("seed", c.seed);
    c.bootstrap_resamples = doc.value("bootstrap_resamples", c.bootstrap_resamples);
    c.paired_seeding = doc.value("paired_seeding", c.paired_seeding);
    c.threads = doc.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad experiment config field: ") + e.what());
  }
  return c;
}

Vocabulary resolve_vocabulary(const ExperimentConfig& config) {
  if (!config.vocab_path.empty()) return load_vocabulary_file(config.vocab_path);
  return generate_vocabulary(config.vocab_gen);
}

bool EpisodeLog::same_outcome(const EpisodeLog& o) const {
  return condition == o.condition && target == o.target && episode == o.episode && seed == o.seed &&
         events == o.events && rewards == o.rewards && cumulative == o.cumulative && aborted == o.aborted && error == o.error;
}

bool ExperimentResult::incomplete() const {
  return std::any_of(episodes.begin(), episodes.end(), [](const EpisodeLog& e) { return e.aborted; });
}

const ConditionCurve* ExperimentResult::curve(Condition c) const {
  for (const auto& k : curves) {
    if (k.condition == c) return &k;
  }
  return nullptr;
}

bool ExperimentResult::same_outcome(const ExperimentResult& o) const {
  if (!(config == o.config) || config_hash != o.config_hash || vocab_size != o.vocab_size || targets != o.targets ||
      curves != o.curves || differences != o.differences || episodes.size() != o.episodes.size()) {
    return false;
  }
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (!episodes[i].same_outcome(o.episodes[i])) return false;
  }
  return true;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t slot, std::size_t episode) {
  return derive_seed(master, {slot, episode});
}

EpisodeLog run_episode(const ExperimentConfig& config, const Vocabulary& vocab, Condition condition, ItemIndex target,
                       std::uint64_t seed) {
  config.validate(vocab);
  if (target >= vocab.size()) throw std::out_of_range("episode target out of range");
  const auto started = std::chrono::steady_clock::now();

  EpisodeLog log;
  log.condition = condition;
  log.target = target;
  log.seed = seed;

  const auto cond_id = static_cast<std::uint64_t>(condition);
  Rng user_rng(config.paired_seeding ? derive_seed(seed, {kUserStream}) : derive_seed(seed, {kUserStream, cond_id}));
  Rng system_rng(derive_seed(seed, {kSystemStream}));

  const UserModelSpec active_model = system_model(config, UserKind::active);
  const UserModelSpec passive_model = system_model(config, UserKind::passive);

  TargetPosterior posterior = TargetPosterior::uniform(vocab.size());
  // The system's copy of the user's model of the system (active condition).
  TargetPosterior nested = posterior;
  AskedSet asked(vocab.size());
  SimulatedUser user = SimulatedUser::start(config.user, target, vocab);

  double total = 0.0;
  try {
    for (int t = 1; t <= config.horizon; ++t) {
      const ItemIndex item =
          select_item(condition == Condition::random ? PolicyKind::random : PolicyKind::thompson, posterior, vocab,
                      asked, system_rng);
      const FeedbackEvent event{t, item, simulate_feedback(user, item, vocab, user_rng)};
      log.events.push_back(event);
      const double reward = vocab.kernel(item, target);
      total += reward;
      log.rewards.push_back(reward);
      log.cumulative.push_back(total);

      if (condition == Condition::active) {
        posterior = belief_update(posterior, event, active_model, vocab, asked, nested);
        try {
          nested = passive_update(nested, item, event.answer, vocab, config.user.epsilon);
        } catch (const DegenerateEvidence&) {
          // Matches the nested look-ahead: an unexplainable answer leaves the belief as is.
        }
      } else if (condition == Condition::passive) {
        posterior = belief_update(posterior, event, passive_model, vocab, asked);
      }
      user = observe(user, event, vocab);
      asked.insert(item);
    }
  } catch (const DegenerateEvidence& e) {
    log.aborted = true;
    log.error = std::string("degenerate evidence: ") + e.what();
  }
  log.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return log;
}

std::vector<ItemIndex> experiment_targets(const ExperimentConfig& config, const Vocabulary& vocab) {
  config.validate(vocab);
  if (!config.targets.empty()) return config.targets;
  // Partial Fisher-Yates on a seeded stream.
  std::vector<ItemIndex> pool(vocab.size());
  for (ItemIndex i = 0; i < pool.size(); ++i) pool[i] = i;
  Rng rng(derive_seed(config.seed, {kTargetStream}));
  for (std::size_t k = 0; k < config.n_targets; ++k) {
    const auto j = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[j]);
  }
  pool.resize(config.n_targets);
  return pool;
}

std::string config_hash(const ExperimentConfig& config, const Vocabulary& vocab) {
  const std::uint64_t h = fnv1a(config.to_json().dump() + "\n" + vocab.to_json().dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Complete episodes of a condition indexed by pairing key.
std::map<std::size_t, const EpisodeLog*> complete_by_episode(const ExperimentResult& result, Condition c) {
  std::map<std::size_t, const EpisodeLog*> out;
  for (const auto& e : result.episodes) {
    if (e.condition == c && !e.aborted) out[e.episode] = &e;
  }
  return out;
}

}  // namespace

void aggregate(ExperimentResult& result) {
  const auto horizon = static_cast<std::size_t>(result.config.horizon);
  const std::uint64_t band_seed = derive_seed(result.config.seed, {kBandStream});
  result.curves.clear();
  result.differences.clear();

  for (std::size_t ci = 0; ci < result.config.conditions.size(); ++ci) {
    const Condition c = result.config.conditions[ci];
    ConditionCurve curve;
    curve.condition = c;
    std::vector<const EpisodeLog*> done;
    for (const auto& e : result.episodes) {
      if (e.condition != c) continue;
      if (e.aborted) ++curve.incomplete;
      else done.push_back(&e);
    }
    curve.complete = done.size();
    for (std::size_t t = 0; t < horizon; ++t) {
      std::vector<double> column;
      column.reserve(done.size());
      for (const auto* e : done) column.push_back(e->cumulative[t]);
      Rng rng(derive_seed(band_seed, {ci, t}));
      const auto band = stats::bootstrap_mean_interval(column, result.config.bootstrap_resamples, 0.95, rng);
      curve.mean.push_back(stats::mean(column));
      curve.lower.push_back(band.lower);
      curve.upper.push_back(band.upper);
    }
    result.curves.push_back(std::move(curve));
  }

  const auto& conds = result.config.conditions;
  for (std::size_t i = 0; i < conds.size(); ++i) {
    for (std::size_t j = i + 1; j < conds.size(); ++j) {
      PairedDifference diff;
      diff.a = conds[i];
      diff.b = conds[j];
      const auto lhs = complete_by_episode(result, conds[i]);
      const auto rhs = complete_by_episode(result, conds[j]);
      std::vector<std::pair<const EpisodeLog*, const EpisodeLog*>> pairs;
      for (const auto& [key, a] : lhs) {
        auto it = rhs.find(key);
        if (it != rhs.end()) pairs.emplace_back(a, it->second);
      }
      diff.pairs = pairs.size();
      for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<double> column;
        for (const auto& [a, b] : pairs) column.push_back(a->cumulative[t] - b->cumulative[t]);
        Rng rng(derive_seed(band_seed, {100 + i, j, t}));
        const auto band = stats::bootstrap_mean_interval(column, result.config.bootstrap_resamples, 0.95, rng);
        diff.mean.push_back(stats::mean(column));
        diff.lower.push_back(band.lower);
        diff.upper.push_back(band.upper);
      }
      result.differences.push_back(std::move(diff));
    }
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Vocabulary& vocab) {
  config.validate(vocab);
  ExperimentResult result;
  result.config = config;
  result.config.threads = 0;
  result.config_hash = config_hash(result.config, vocab);
  result.vocab_size = vocab.size();
  result.targets = experiment_targets(config, vocab);

  const std::size_t per_condition = result.targets.size() * config.episodes_per_target;
  const std::size_t cells = config.conditions.size() * per_condition;
  result.episodes.resize(cells);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < cells; idx = next++) {
      const std::size_t ci = idx / per_condition;
      const std::size_t key = idx % per_condition;
      const std::size_t slot = key / config.episodes_per_target;
      const std::size_t ep = key % config.episodes_per_target;
      try {
        auto log = run_episode(config, vocab, config.conditions[ci], result.targets[slot],
                               cell_seed(config.seed, slot, ep));
        log.episode = key;
        result.episodes[idx] = std::move(log);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  aggregate(result);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, resolve_vocabulary(config));
}

nlohmann::json Comparison::to_json() const {
  return {{"condition_a", std::string(to_string(a))},
          {"condition_b", std::string(to_string(b))},
          {"turn", turn},
          {"pairs", pairs},
          {"mean_difference", mean_difference},
          {"ci95", {lower, upper}},
          {"sign_test_p", sign_test_p},
          {"wins", wins},
          {"losses", losses},
          {"ties", ties},
          {"excludes_zero", excludes_zero()}};
}

Comparison compare_conditions(const ExperimentResult& result, Condition a, Condition b, int turn) {
  const auto& conds = result.config.conditions;
  for (auto c : {a, b}) {
    if (std::find(conds.begin(), conds.end(), c) == conds.end()) {
      throw std::invalid_argument("condition '" + std::string(to_string(c)) + "' is not in the result");
    }
  }
  if (turn < 1 || turn > result.config.horizon) {
    throw std::invalid_argument("turn " + std::to_string(turn) + " outside 1.." + std::to_string(result.config.horizon));
  }

  std::map<std::size_t, const EpisodeLog*> lhs;
  std::map<std::size_t, const EpisodeLog*> rhs;
  for (const auto& e : result.episodes) {
    if (e.condition == a) lhs[e.episode] = &e;
    if (e.condition == b) rhs[e.episode] = &e;
  }
  if (lhs.size() != rhs.size()) throw std::invalid_argument("unpaired results: episode counts differ");
  std::vector<double> diffs;
  for (const auto& [key, ea] : lhs) {
    auto it = rhs.find(key);
    if (it == rhs.end()) throw std::invalid_argument("unpaired results: episode " + std::to_string(key) + " missing");
    const EpisodeLog* eb = it->second;
    if (ea->target != eb->target) {
      throw std::invalid_argument("unpaired results: episode " + std::to_string(key) + " has different targets");
    }
    if (ea->aborted || eb->aborted) continue;
    const auto t = static_cast<std::size_t>(turn - 1);
    diffs.push_back(ea->cumulative.at(t) - eb->cumulative.at(t));
  }

  Comparison cmp;
  cmp.a = a;
  cmp.b = b;
  cmp.turn = turn;
  cmp.pairs = diffs.size();
  for (double d : diffs) {
    if (d > 0.0) ++cmp.wins;
    else if (d < 0.0) ++cmp.losses;
    else ++cmp.ties;
  }
  cmp.mean_difference = stats::mean(diffs);
  Rng rng(derive_seed(result.config.seed,
                      {kCompareStream, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b),
                       static_cast<std::uint64_t>(turn)}));
  const auto ci = stats::bootstrap_mean_interval(diffs, kComparisonResamples, 0.95, rng);
  cmp.lower = ci.lower;
  cmp.upper = ci.upper;
  cmp.sign_test_p = stats::sign_test_p_value(diffs);
  return cmp;
}

}  // namespace tombandit
