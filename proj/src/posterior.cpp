#include "tombandit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tombandit {

TargetPosterior::TargetPosterior(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("posterior must be non-empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("posterior entry " + std::to_string(i) + " is negative or not finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPosteriorSumTolerance) {
    throw std::invalid_argument("posterior sums to " + std::to_string(sum) + ", not 1");
  }
}

TargetPosterior TargetPosterior::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("posterior must be non-empty");
  return TargetPosterior(std::vector<double>(n, 1.0 / static_cast<double>(n)), Unchecked{});
}

TargetPosterior TargetPosterior::one_hot(std::size_t n, ItemIndex at) {
  if (at >= n) throw std::out_of_range("one-hot index out of range");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return TargetPosterior(std::move(p), Unchecked{});
}

TargetPosterior TargetPosterior::reweighted(std::span<const double> weights) const {
  if (weights.size() != probs_.size()) throw std::invalid_argument("weight vector size mismatch");
  std::vector<double> next(probs_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = probs_[i] * weights[i];
    total += next[i];
  }
  if (!(total > 0.0)) throw DegenerateEvidence("observation has zero likelihood under every supported target");
  for (auto& p : next) p /= total;
  return TargetPosterior(std::move(next), Unchecked{});
}

double TargetPosterior::entropy() const {
  double h = 0.0;
  for (double p : probs_) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<std::pair<ItemIndex, double>> TargetPosterior::top_k(std::size_t k) const {
  std::vector<ItemIndex> order(probs_.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ItemIndex a, ItemIndex b) { return probs_[a] > probs_[b]; });
  order.resize(std::min(k, order.size()));
  std::vector<std::pair<ItemIndex, double>> out;
  for (auto i : order) out.emplace_back(i, probs_[i]);
  return out;
}

bool AskedSet::insert(ItemIndex i) {
  if (i >= mask_.size()) throw std::out_of_range("asked item " + std::to_string(i) + " out of range");
  if (mask_[i]) return false;
  mask_[i] = true;
  ++count_;
  return true;
}

}  // namespace tombandit
