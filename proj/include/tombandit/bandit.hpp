#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tombandit/posterior.hpp"
#include "tombandit/rng.hpp"
#include "tombandit/vocabulary.hpp"

namespace tombandit {

/// One interaction round: the system showed `item` at `turn` (1-based) and
/// the user answered yes (1) or no (0).
struct FeedbackEvent {
  int turn = 1;
  ItemIndex item = 0;
  int answer = 0;

  bool operator==(const FeedbackEvent&) const = default;
};

/// Throws std::invalid_argument / std::out_of_range if the event is malformed for `vocab`.
void validate_event(const FeedbackEvent& event, const Vocabulary& vocab);

enum class PolicyKind { greedy, thompson, random };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

/// Raised when every item has already been asked.
class NoItemsLeft : public std::runtime_error {
 public:
  NoItemsLeft() : std::runtime_error("no unasked item remains") {}
};

/// Expected relevance of showing `item` under the posterior.
double expected_relevance(const TargetPosterior& posterior, const Vocabulary& vocab, ItemIndex item);

/// Picks the next item to show. Greedy and Thompson break ties by lowest
/// index; random is uniform over unasked items. Never returns an asked item.
ItemIndex select_item(PolicyKind policy, const TargetPosterior& posterior, const Vocabulary& vocab,
                      const AskedSet& asked, Rng& rng);

/// The user's prediction of the system's next item. Deterministic: always
/// the greedy choice, whatever policy the live system runs.
ItemIndex anticipate_next_item(const TargetPosterior& posterior, const Vocabulary& vocab, const AskedSet& asked);

/// Per-turn prefix sums of kernel(item_t, target); back() is the total.
std::vector<double> reward_curve(std::span<const FeedbackEvent> history, const Vocabulary& vocab, ItemIndex target);

double cumulative_reward(std::span<const FeedbackEvent> history, const Vocabulary& vocab, ItemIndex target);

}  // namespace tombandit
