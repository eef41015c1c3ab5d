#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tombandit/bandit.hpp"
#include "tombandit/user_model.hpp"
#include "tombandit/vocabulary.hpp"

namespace tombandit {

/// Which system variant plays an episode.
enum class Condition { active, passive, random };

std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view name);

/// Level of agency the condition's user model assumes: 4 for the
/// strategic (nested) model, 2 for the passive profile, 0 for the baseline.
int agency_level(Condition c);

struct ExperimentConfig {
  /// Vocabulary file; empty means generate one from vocab_gen.
  std::string vocab_path;
  VocabularyGenParams vocab_gen{};
  int horizon = 20;
  std::vector<Condition> conditions{Condition::active, Condition::passive, Condition::random};
  /// True behaviour of the simulated user. The active and passive systems
  /// assume the same epsilon, beta and depth.
  UserModelSpec user{};
  /// Explicit targets; when empty, n_targets are drawn without replacement.
  std::vector<ItemIndex> targets;
  std::size_t n_targets = 20;
  std::size_t episodes_per_target = 10;
  std::uint64_t seed = 2019;
  std::size_t bootstrap_resamples = 10000;
  /// Share user randomness across conditions within a cell.
  bool paired_seeding = true;
  /// Worker threads for cells; 0 = hardware concurrency.
  unsigned threads = 0;

  /// Checks field ranges; with a vocabulary also checks horizon and targets against N.
  void validate() const;
  void validate(const Vocabulary& vocab) const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& doc);

  bool operator==(const ExperimentConfig&) const = default;
};

/// The vocabulary named by the config (loaded or generated).
Vocabulary resolve_vocabulary(const ExperimentConfig& config);

struct EpisodeLog {
  Condition condition = Condition::random;
  ItemIndex target = 0;
  /// Pairing key shared by the same cell across conditions.
  std::size_t episode = 0;
  std::uint64_t seed = 0;
  std::vector<FeedbackEvent> events;
  /// kernel(item_t, target) per round and its prefix sums.
  std::vector<double> rewards;
  std::vector<double> cumulative;
  bool aborted = false;
  std::string error;
  /// Not part of result.json, so reruns stay byte-identical.
  double wall_time_ms = 0.0;

  bool same_outcome(const EpisodeLog& other) const;
};

struct ConditionCurve {
  Condition condition = Condition::random;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t complete = 0;
  std::size_t incomplete = 0;

  bool operator==(const ConditionCurve&) const = default;
};

/// Mean of (a - b) cumulative reward per turn over paired episodes.
struct PairedDifference {
  Condition a = Condition::active;
  Condition b = Condition::passive;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t pairs = 0;

  bool operator==(const PairedDifference&) const = default;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_hash;
  std::size_t vocab_size = 0;
  std::vector<ItemIndex> targets;
  std::vector<ConditionCurve> curves;
  std::vector<PairedDifference> differences;
  std::vector<EpisodeLog> episodes;

  bool incomplete() const;
  const ConditionCurve* curve(Condition c) const;

  /// Equality of every exported number; wall times are ignored.
  bool same_outcome(const ExperimentResult& other) const;
};

/// Plays one episode. `seed` identifies the cell; the user's stream is
/// derived from it alone (plus the condition when pairing is off).
EpisodeLog run_episode(const ExperimentConfig& config, const Vocabulary& vocab, Condition condition, ItemIndex target,
                       std::uint64_t seed);

/// Seed of cell (target slot, episode) under the master seed.
std::uint64_t cell_seed(std::uint64_t master, std::size_t slot, std::size_t episode);

/// Targets used by the config: the explicit list or a seeded sample.
std::vector<ItemIndex> experiment_targets(const ExperimentConfig& config, const Vocabulary& vocab);

ExperimentResult run_experiment(const ExperimentConfig& config, const Vocabulary& vocab);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Rebuilds curves and paired differences from the episode logs.
void aggregate(ExperimentResult& result);

struct Comparison {
  Condition a = Condition::active;
  Condition b = Condition::passive;
  int turn = 0;
  std::size_t pairs = 0;
  double mean_difference = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double sign_test_p = 1.0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;

  bool excludes_zero() const { return lower > 0.0 || upper < 0.0; }
  nlohmann::json to_json() const;
};

inline constexpr std::size_t kComparisonResamples = 10000;

/// Paired statistics of cumulative reward at `turn` (1-based).
Comparison compare_conditions(const ExperimentResult& result, Condition a, Condition b, int turn);

std::string config_hash(const ExperimentConfig& config, const Vocabulary& vocab);

}  // namespace tombandit
