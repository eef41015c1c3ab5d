#include "tombandit/simulated_user.hpp"

namespace tombandit {

SimulatedUser SimulatedUser::start(const UserModelSpec& spec, ItemIndex target, const Vocabulary& vocab) {
  spec.validate();
  if (target >= vocab.size()) throw std::out_of_range("simulated user target out of range");
  return SimulatedUser{spec, target, TargetPosterior::uniform(vocab.size()), AskedSet(vocab.size())};
}

double feedback_yes_probability(const SimulatedUser& user, ItemIndex item, const Vocabulary& vocab) {
  if (user.spec.kind == UserKind::passive) {
    return passive_likelihood(1, item, user.true_target, vocab, user.spec.epsilon);
  }
  if (user.mirror.size() != vocab.size() || user.mirror_asked.universe() != vocab.size()) {
    throw ProtocolError("simulated user mirror does not match the vocabulary");
  }
  if (user.mirror_asked.contains(item)) {
    throw ProtocolError("item " + std::to_string(item) + " was already shown according to the user's mirror");
  }
  return active_likelihood(1, item, user.true_target, vocab, user.mirror, user.mirror_asked, user.spec);
}

int simulate_feedback(const SimulatedUser& user, ItemIndex item, const Vocabulary& vocab, Rng& rng) {
  return rng.bernoulli(feedback_yes_probability(user, item, vocab)) ? 1 : 0;
}

SimulatedUser observe(const SimulatedUser& user, const FeedbackEvent& event, const Vocabulary& vocab) {
  if (user.spec.kind == UserKind::passive) return user;
  validate_event(event, vocab);
  if (user.mirror_asked.contains(event.item)) {
    throw ProtocolError("item " + std::to_string(event.item) + " observed twice by the user's mirror");
  }
  if (static_cast<std::size_t>(event.turn) != user.mirror_asked.count() + 1) {
    throw ProtocolError("event turn " + std::to_string(event.turn) + " does not follow the mirror's " +
                        std::to_string(user.mirror_asked.count()) + " observed rounds");
  }
  SimulatedUser next = user;
  try {
    next.mirror = passive_update(user.mirror, event.item, event.answer, vocab, user.spec.epsilon);
  } catch (const DegenerateEvidence&) {
    // Same convention as the system's nested copy: the belief stays put.
  }
  next.mirror_asked.insert(event.item);
  return next;
}

}  // namespace tombandit
