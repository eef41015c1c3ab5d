#include "tombandit/user_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace tombandit {

namespace {

void check_answer(int answer) {
  if (answer != 0 && answer != 1) throw std::invalid_argument("answer must be 0 or 1");
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in [0, 0.5)");
}

double noisy(double p_yes, double epsilon) { return (1.0 - 2.0 * epsilon) * p_yes + epsilon; }

double choose(int answer, double p_yes) { return answer == 1 ? p_yes : 1.0 - p_yes; }

// What the strategic user expects the system to do after each answer: the
// next greedy item and, for deeper plans, the tree below it. Independent of
// the user's target, so it is built once and scored per target.
struct Lookahead {
  struct Branch {
    std::optional<ItemIndex> anticipated;
    std::vector<Branch> next;  // empty or {answer 0, answer 1}
  };
  std::array<Branch, 2> branches;
  bool exhausted = false;
};

void expand(std::array<Lookahead::Branch, 2>& out, ItemIndex item, const TargetPosterior& posterior,
            const AskedSet& asked, const Vocabulary& vocab, double epsilon, int depth) {
  const AskedSet after = asked.with(item);
  for (int a = 0; a < 2; ++a) {
    auto& branch = out[static_cast<std::size_t>(a)];
    if (after.remaining() == 0) continue;
    std::optional<TargetPosterior> imagined;
    try {
      imagined = passive_update(posterior, item, a, vocab, epsilon);
    } catch (const DegenerateEvidence&) {
      // An answer the system's model cannot explain leaves its belief as is.
      imagined = posterior;
    }
    const ItemIndex next = anticipate_next_item(*imagined, vocab, after);
    branch.anticipated = next;
    if (depth > 1) {
      std::array<Lookahead::Branch, 2> children;
      expand(children, next, *imagined, after, vocab, epsilon, depth - 1);
      branch.next.assign(children.begin(), children.end());
    }
  }
}

Lookahead build_lookahead(ItemIndex item, const TargetPosterior& posterior, const AskedSet& asked,
                          const Vocabulary& vocab, const UserModelSpec& spec) {
  Lookahead tree;
  expand(tree.branches, item, posterior, asked, vocab, spec.epsilon, spec.depth);
  const std::size_t left = asked.with(item).remaining();
  tree.exhausted = left < static_cast<std::size_t>(spec.depth);
  return tree;
}

double branch_value(const Lookahead::Branch& branch, ItemIndex target, const Vocabulary& vocab) {
  if (!branch.anticipated) return 0.0;
  double value = vocab.kernel(*branch.anticipated, target);
  if (!branch.next.empty()) {
    value += std::max(branch_value(branch.next[0], target, vocab), branch_value(branch.next[1], target, vocab));
  }
  return value;
}

FeedbackValues score(const Lookahead& tree, ItemIndex target, const Vocabulary& vocab) {
  return {branch_value(tree.branches[0], target, vocab), branch_value(tree.branches[1], target, vocab),
          tree.exhausted};
}

void check_state(const Vocabulary& vocab, const TargetPosterior& posterior, const AskedSet& asked) {
  if (posterior.size() != vocab.size() || asked.universe() != vocab.size()) {
    throw std::invalid_argument("posterior, asked set and vocabulary sizes differ");
  }
}

void require_active(const UserModelSpec& spec) {
  spec.validate();
  if (spec.kind != UserKind::active) throw std::invalid_argument("active likelihood needs an active user spec");
}

}  // namespace

std::string_view to_string(UserKind kind) { return kind == UserKind::passive ? "passive" : "active"; }

UserKind user_kind_from_string(std::string_view name) {
  if (name == "passive") return UserKind::passive;
  if (name == "active") return UserKind::active;
  throw std::invalid_argument("unknown user kind '" + std::string(name) + "'");
}

void UserModelSpec::validate() const {
  check_epsilon(epsilon);
  if (kind == UserKind::active) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  }
}

double passive_likelihood(int answer, ItemIndex item, ItemIndex target, const Vocabulary& vocab, double epsilon) {
  check_answer(answer);
  check_epsilon(epsilon);
  return choose(answer, noisy(vocab.relevance(item, target), epsilon));
}

TargetPosterior passive_update(const TargetPosterior& posterior, ItemIndex item, int answer, const Vocabulary& vocab,
                               double epsilon) {
  check_answer(answer);
  check_epsilon(epsilon);
  if (item >= vocab.size()) throw std::out_of_range("item index out of range");
  std::vector<double> weights(vocab.size());
  for (ItemIndex w = 0; w < vocab.size(); ++w) weights[w] = choose(answer, noisy(vocab.kernel(item, w), epsilon));
  return posterior.reweighted(weights);
}

FeedbackValues active_feedback_values(ItemIndex item, ItemIndex target, const Vocabulary& vocab,
                                      const TargetPosterior& posterior, const AskedSet& asked,
                                      const UserModelSpec& spec) {
  require_active(spec);
  check_state(vocab, posterior, asked);
  if (item >= vocab.size() || target >= vocab.size()) throw std::out_of_range("item or target out of range");
  return score(build_lookahead(item, posterior, asked, vocab, spec), target, vocab);
}

double boltzmann_yes_probability(double v0, double v1, double beta) {
  const double s0 = beta * v0;
  const double s1 = beta * v1;
  const double top = std::max(s0, s1);
  const double e0 = std::exp(s0 - top);
  const double e1 = std::exp(s1 - top);
  return e1 / (e0 + e1);
}

double active_likelihood(int answer, ItemIndex item, ItemIndex target, const Vocabulary& vocab,
                         const TargetPosterior& posterior, const AskedSet& asked, const UserModelSpec& spec) {
  check_answer(answer);
  const auto values = active_feedback_values(item, target, vocab, posterior, asked, spec);
  return choose(answer, noisy(boltzmann_yes_probability(values.v0, values.v1, spec.beta), spec.epsilon));
}

std::vector<double> likelihood_vector(int answer, ItemIndex item, const Vocabulary& vocab, const UserModelSpec& spec,
                                      const TargetPosterior& nested, const AskedSet& asked_before) {
  check_answer(answer);
  spec.validate();
  if (item >= vocab.size()) throw std::out_of_range("item index out of range");
  std::vector<double> out(vocab.size());
  if (spec.kind == UserKind::passive) {
    for (ItemIndex w = 0; w < vocab.size(); ++w) out[w] = choose(answer, noisy(vocab.kernel(item, w), spec.epsilon));
    return out;
  }
  check_state(vocab, nested, asked_before);
  const Lookahead tree = build_lookahead(item, nested, asked_before, vocab, spec);
  for (ItemIndex w = 0; w < vocab.size(); ++w) {
    const auto values = score(tree, w, vocab);
    out[w] = choose(answer, noisy(boltzmann_yes_probability(values.v0, values.v1, spec.beta), spec.epsilon));
  }
  return out;
}

TargetPosterior belief_update(const TargetPosterior& posterior, const FeedbackEvent& event, const UserModelSpec& spec,
                              const Vocabulary& vocab, const AskedSet& asked_before) {
  return belief_update(posterior, event, spec, vocab, asked_before, posterior);
}

TargetPosterior belief_update(const TargetPosterior& posterior, const FeedbackEvent& event, const UserModelSpec& spec,
                              const Vocabulary& vocab, const AskedSet& asked_before, const TargetPosterior& nested) {
  validate_event(event, vocab);
  if (posterior.size() != vocab.size()) throw std::invalid_argument("posterior and vocabulary sizes differ");
  const auto weights = likelihood_vector(event.answer, event.item, vocab, spec, nested, asked_before);
  return posterior.reweighted(weights);
}

}  // namespace tombandit
