#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tombandit {

using ItemIndex = std::size_t;

/// Tolerance for symmetry and unit-diagonal checks on loaded kernels.
inline constexpr double kKernelTolerance = 1e-9;

/// Raised when a vocabulary document is malformed or violates a kernel
/// invariant. Carries the offending (row, col) when one applies.
class VocabularyError : public std::runtime_error {
 public:
  VocabularyError(const std::string& what, std::optional<std::size_t> row = std::nullopt,
                  std::optional<std::size_t> col = std::nullopt);

  std::optional<std::size_t> row() const { return row_; }
  std::optional<std::size_t> col() const { return col_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
};

/// Item names plus a symmetric relevance kernel; kernel(i, w) is the
/// reward of showing item i when the hidden target is w.
class Vocabulary {
 public:
  /// Validates every invariant; throws VocabularyError on the first violation.
  Vocabulary(std::vector<std::string> items, std::vector<std::vector<double>> kernel);

  std::size_t size() const { return items_.size(); }
  const std::vector<std::string>& items() const { return items_; }
  const std::string& item(ItemIndex i) const;

  /// Bounds-checked relevance lookup.
  double relevance(ItemIndex item, ItemIndex target) const;

  /// Unchecked lookup for inner loops.
  double kernel(ItemIndex item, ItemIndex target) const noexcept { return kernel_[item * size() + target]; }

  std::optional<ItemIndex> find(const std::string& word) const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::string> items_;
  std::vector<double> kernel_;
};

Vocabulary load_vocabulary(std::istream& source);
Vocabulary load_vocabulary_file(const std::string& path);
Vocabulary vocabulary_from_json(const nlohmann::json& doc);

struct VocabularyGenParams {
  std::size_t n = 50;
  std::size_t dim = 8;
  double sharpness = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const VocabularyGenParams&) const = default;
};

/// Random kernel from unit vectors on a sphere:
/// kernel(i, w) = ((1 + cos(i, w)) / 2)^sharpness, unit diagonal.
Vocabulary generate_vocabulary(const VocabularyGenParams& params);

}  // namespace tombandit
