#pragma once

#include <stdexcept>

#include "tombandit/bandit.hpp"
#include "tombandit/user_model.hpp"

namespace tombandit {

/// The mirror is out of step with the items the system actually showed.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generative user with a hidden target. A strategic (active) user keeps a
/// mirror of the system's belief, updated as if the system were passive.
struct SimulatedUser {
  UserModelSpec spec;
  ItemIndex true_target = 0;
  TargetPosterior mirror;
  AskedSet mirror_asked;

  /// Fresh user: uniform mirror, nothing asked.
  static SimulatedUser start(const UserModelSpec& spec, ItemIndex target, const Vocabulary& vocab);
};

/// Draws the user's answer to `item`.
int simulate_feedback(const SimulatedUser& user, ItemIndex item, const Vocabulary& vocab, Rng& rng);

/// P(yes) that simulate_feedback draws from.
double feedback_yes_probability(const SimulatedUser& user, ItemIndex item, const Vocabulary& vocab);

/// Advances the mirror by the round just played; passive users are returned unchanged.
SimulatedUser observe(const SimulatedUser& user, const FeedbackEvent& event, const Vocabulary& vocab);

}  // namespace tombandit
