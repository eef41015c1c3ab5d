#include "tombandit/bandit.hpp"

#include <stdexcept>

namespace tombandit {

namespace {

void check_sizes(const TargetPosterior& posterior, const Vocabulary& vocab, const AskedSet& asked) {
  if (posterior.size() != vocab.size() || asked.universe() != vocab.size()) {
    throw std::invalid_argument("posterior, asked set and vocabulary sizes differ");
  }
}

ItemIndex greedy_argmax(const TargetPosterior& posterior, const Vocabulary& vocab, const AskedSet& asked) {
  check_sizes(posterior, vocab, asked);
  if (asked.remaining() == 0) throw NoItemsLeft();
  std::optional<ItemIndex> best;
  double best_score = 0.0;
  for (ItemIndex i = 0; i < vocab.size(); ++i) {
    if (asked.contains(i)) continue;
    const double score = expected_relevance(posterior, vocab, i);
    if (!best || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return *best;
}

}  // namespace

void validate_event(const FeedbackEvent& event, const Vocabulary& vocab) {
  if (event.turn < 1) throw std::invalid_argument("event turn must be >= 1");
  if (event.item >= vocab.size()) throw std::out_of_range("event item out of range");
  if (event.answer != 0 && event.answer != 1) throw std::invalid_argument("event answer must be 0 or 1");
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::thompson: return "thompson";
    case PolicyKind::random: return "random";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "greedy") return PolicyKind::greedy;
  if (name == "thompson") return PolicyKind::thompson;
  if (name == "random") return PolicyKind::random;
  throw std::invalid_argument("unknown selection policy '" + std::string(name) + "'");
}

double expected_relevance(const TargetPosterior& posterior, const Vocabulary& vocab, ItemIndex item) {
  double score = 0.0;
  for (ItemIndex w = 0; w < vocab.size(); ++w) score += posterior[w] * vocab.kernel(item, w);
  return score;
}

ItemIndex select_item(PolicyKind policy, const TargetPosterior& posterior, const Vocabulary& vocab,
                      const AskedSet& asked, Rng& rng) {
  check_sizes(posterior, vocab, asked);
  if (asked.remaining() == 0) throw NoItemsLeft();
  switch (policy) {
    case PolicyKind::greedy:
      return greedy_argmax(posterior, vocab, asked);
    case PolicyKind::thompson: {
      const double u = rng.uniform01();
      double acc = 0.0;
      ItemIndex sampled = 0;
      // Last target with positive mass absorbs rounding in the cumulative sum.
      for (ItemIndex w = 0; w < posterior.size(); ++w) {
        if (posterior[w] <= 0.0) continue;
        sampled = w;
        acc += posterior[w];
        if (u < acc) break;
      }
      std::optional<ItemIndex> best;
      double best_score = 0.0;
      for (ItemIndex i = 0; i < vocab.size(); ++i) {
        if (asked.contains(i)) continue;
        const double score = vocab.kernel(i, sampled);
        if (!best || score > best_score) {
          best = i;
          best_score = score;
        }
      }
      return *best;
    }
    case PolicyKind::random: {
      auto k = rng.below(asked.remaining());
      for (ItemIndex i = 0; i < vocab.size(); ++i) {
        if (asked.contains(i)) continue;
        if (k-- == 0) return i;
      }
      break;
    }
  }
  throw std::logic_error("unreachable selection policy");
}

ItemIndex anticipate_next_item(const TargetPosterior& posterior, const Vocabulary& vocab, const AskedSet& asked) {
  return greedy_argmax(posterior, vocab, asked);
}

std::vector<double> reward_curve(std::span<const FeedbackEvent> history, const Vocabulary& vocab, ItemIndex target) {
  if (target >= vocab.size()) throw std::out_of_range("target index out of range");
  std::vector<double> curve;
  curve.reserve(history.size());
  double total = 0.0;
  for (const auto& e : history) {
    total += vocab.relevance(e.item, target);
    curve.push_back(total);
  }
  return curve;
}

double cumulative_reward(std::span<const FeedbackEvent> history, const Vocabulary& vocab, ItemIndex target) {
  const auto curve = reward_curve(history, vocab, target);
  return curve.empty() ? 0.0 : curve.back();
}

}  // namespace tombandit
