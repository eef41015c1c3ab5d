#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tombandit {

using ItemIndex = std::size_t;

inline constexpr double kPosteriorSumTolerance = 1e-9;

/// Probability vector over candidate targets; the system's belief state.
class TargetPosterior {
 public:
  /// Validates non-negativity, finiteness, and unit mass.
  explicit TargetPosterior(std::vector<double> probs);

  static TargetPosterior uniform(std::size_t n);
  static TargetPosterior one_hot(std::size_t n, ItemIndex at);

  /// Multiplies by per-target weights and renormalises. Throws
  /// DegenerateEvidence when the product has zero total mass.
  TargetPosterior reweighted(std::span<const double> weights) const;

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  /// Shannon entropy in nats.
  double entropy() const;

  /// The k most probable targets, descending, ties by lowest index.
  std::vector<std::pair<ItemIndex, double>> top_k(std::size_t k) const;

  bool operator==(const TargetPosterior&) const = default;

 private:
  struct Unchecked {};
  TargetPosterior(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Observation with zero likelihood under every target that still has mass.
class DegenerateEvidence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Items already shown in an episode.
class AskedSet {
 public:
  explicit AskedSet(std::size_t n) : mask_(n, false) {}

  std::size_t universe() const { return mask_.size(); }
  std::size_t count() const { return count_; }
  std::size_t remaining() const { return mask_.size() - count_; }
  bool contains(ItemIndex i) const { return i < mask_.size() && mask_[i]; }

  /// Returns false if the item was already present.
  bool insert(ItemIndex i);
  AskedSet with(ItemIndex i) const {
    AskedSet copy = *this;
    copy.insert(i);
    return copy;
  }

  bool operator==(const AskedSet&) const = default;

 private:
  std::vector<bool> mask_;
  std::size_t count_ = 0;
};

}  // namespace tombandit
