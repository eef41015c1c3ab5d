#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "tombandit/bandit.hpp"
#include "tombandit/posterior.hpp"
#include "tombandit/vocabulary.hpp"

namespace tombandit {

enum class UserKind { passive, active };

std::string_view to_string(UserKind kind);
UserKind user_kind_from_string(std::string_view name);

/// Parameters of an assumed (or simulated) user.
struct UserModelSpec {
  UserKind kind = UserKind::active;
  double epsilon = 0.05;  ///< answer noise, in [0, 0.5)
  double beta = 5.0;      ///< Boltzmann rationality, >= 0
  int depth = 1;          ///< look-ahead steps, >= 1 (active only)

  /// Throws std::invalid_argument on an out-of-range field.
  void validate() const;

  bool operator==(const UserModelSpec&) const = default;
};

/// P(answer | item, target) for a user whose answers come from a fixed
/// relevance profile: P(yes) = (1 - 2 eps) * kernel(item, target) + eps.
double passive_likelihood(int answer, ItemIndex item, ItemIndex target, const Vocabulary& vocab, double epsilon);

/// Value of each answer to the strategic user: the relevance (to the user's
/// target) of the items she expects the system to show next.
struct FeedbackValues {
  double v0 = 0.0;
  double v1 = 0.0;
  /// Fewer unasked items remained than the look-ahead depth; values cover
  /// only the items that could still be shown.
  bool exhausted = false;
};

/// The user simulates the system's passive belief update for each answer,
/// predicts its greedy next item, and scores it against her target. For
/// depth > 1 she keeps planning with her best answer at every later step.
/// `posterior` and `asked` are her model of the system before `item` was shown.
FeedbackValues active_feedback_values(ItemIndex item, ItemIndex target, const Vocabulary& vocab,
                                      const TargetPosterior& posterior, const AskedSet& asked,
                                      const UserModelSpec& spec);

/// Soft-max choice between the two answers, stable for any finite beta.
double boltzmann_yes_probability(double v0, double v1, double beta);

/// P(answer | item, target) for the strategic user, including answer noise.
double active_likelihood(int answer, ItemIndex item, ItemIndex target, const Vocabulary& vocab,
                         const TargetPosterior& posterior, const AskedSet& asked, const UserModelSpec& spec);

/// Likelihood of `answer` to `item` for every target hypothesis at once.
/// For the active kind, `nested` / `asked_before` are the user's model of
/// the system at the time the item was shown.
std::vector<double> likelihood_vector(int answer, ItemIndex item, const Vocabulary& vocab, const UserModelSpec& spec,
                                      const TargetPosterior& nested, const AskedSet& asked_before);

/// Bayes update with the likelihood family chosen by spec.kind. The active
/// model uses `posterior` itself as the user's model of the system.
TargetPosterior belief_update(const TargetPosterior& posterior, const FeedbackEvent& event, const UserModelSpec& spec,
                              const Vocabulary& vocab, const AskedSet& asked_before);

/// As above, with the user's model of the system supplied separately. The
/// harness and service keep that nested state as a passive posterior.
TargetPosterior belief_update(const TargetPosterior& posterior, const FeedbackEvent& event, const UserModelSpec& spec,
                              const Vocabulary& vocab, const AskedSet& asked_before, const TargetPosterior& nested);

/// The passive update the strategic user believes the system performs.
TargetPosterior passive_update(const TargetPosterior& posterior, ItemIndex item, int answer, const Vocabulary& vocab,
                               double epsilon);

}  // namespace tombandit
