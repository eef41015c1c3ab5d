#include "tombandit/vocabulary.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "tombandit/rng.hpp"

namespace tombandit {

namespace {

std::string at_index(std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << " at (" << r << ", " << c << ")";
  return os.str();
}

// Plain-word list for generated vocabularies; extra items get numbered names.
const char* const kWords[] = {
    "apple",   "river",   "guitar",  "mountain", "coffee",  "planet",  "engine",  "forest",
    "castle",  "ocean",   "violin",  "desert",   "candle",  "bridge",  "tiger",   "garden",
    "rocket",  "island",  "pencil",  "thunder",  "lantern", "glacier", "falcon",  "harbor",
    "marble",  "meadow",  "compass", "volcano",  "orchard", "canyon",  "anchor",  "feather",
    "bicycle", "library", "cactus",  "dolphin",  "whistle", "blanket", "tornado", "emerald",
    "kitchen", "saddle",  "puzzle",  "lobster",  "chimney", "pyramid", "crystal", "lighthouse",
    "walnut",  "mirror",  "trumpet", "penguin",  "rainbow", "ladder",  "sailboat", "cinnamon",
    "mushroom", "satellite", "hammock", "quilt",  "museum",  "tractor", "butterfly", "telescope"};

std::string generated_word(std::size_t i) {
  constexpr std::size_t count = sizeof(kWords) / sizeof(kWords[0]);
  if (i < count) return kWords[i];
  return "item" + std::to_string(i);
}

}  // namespace

VocabularyError::VocabularyError(const std::string& what, std::optional<std::size_t> row,
                                 std::optional<std::size_t> col)
    : std::runtime_error(what), row_(row), col_(col) {}

Vocabulary::Vocabulary(std::vector<std::string> items, std::vector<std::vector<double>> kernel)
    : items_(std::move(items)) {
  const std::size_t n = items_.size();
  if (n == 0) throw VocabularyError("vocabulary must contain at least one item");
  if (kernel.size() != n) {
    throw VocabularyError("kernel has " + std::to_string(kernel.size()) + " rows, expected " +
                          std::to_string(n));
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (kernel[r].size() != n) {
      throw VocabularyError("kernel row " + std::to_string(r) + " has " +
                                std::to_string(kernel[r].size()) + " entries, expected " + std::to_string(n),
                            r);
    }
  }
  kernel_.resize(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = kernel[r][c];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw VocabularyError("kernel entry outside [0,1]" + at_index(r, c), r, c);
      }
      kernel_[r * n + c] = v;
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (std::abs(kernel_[r * n + r] - 1.0) > kKernelTolerance) {
      throw VocabularyError("kernel diagonal entry is not 1" + at_index(r, r), r, r);
    }
    for (std::size_t c = r + 1; c < n; ++c) {
      if (std::abs(kernel_[r * n + c] - kernel_[c * n + r]) > kKernelTolerance) {
        throw VocabularyError("kernel is asymmetric" + at_index(r, c), r, c);
      }
    }
  }
}

const std::string& Vocabulary::item(ItemIndex i) const {
  if (i >= size()) throw std::out_of_range("item index " + std::to_string(i) + " out of range");
  return items_[i];
}

double Vocabulary::relevance(ItemIndex item, ItemIndex target) const {
  if (item >= size() || target >= size()) {
    throw std::out_of_range("relevance index" + at_index(item, target) + " out of range for N=" +
                            std::to_string(size()));
  }
  return kernel(item, target);
}

std::optional<ItemIndex> Vocabulary::find(const std::string& word) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i] == word) return i;
  }
  return std::nullopt;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t n = size();
  for (std::size_t r = 0; r < n; ++r) {
    rows.push_back(std::vector<double>(kernel_.begin() + static_cast<std::ptrdiff_t>(r * n),
                                       kernel_.begin() + static_cast<std::ptrdiff_t>((r + 1) * n)));
  }
  return {{"items", items_}, {"kernel", std::move(rows)}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw VocabularyError("vocabulary document must be a JSON object");
  if (!doc.contains("items") || !doc["items"].is_array()) {
    throw VocabularyError("vocabulary document needs an 'items' array");
  }
  if (!doc.contains("kernel") || !doc["kernel"].is_array()) {
    throw VocabularyError("vocabulary document needs a 'kernel' array");
  }
  std::vector<std::string> items;
  for (std::size_t i = 0; i < doc["items"].size(); ++i) {
    const auto& v = doc["items"][i];
    if (!v.is_string()) throw VocabularyError("item " + std::to_string(i) + " is not a string", i);
    items.push_back(v.get<std::string>());
  }
  std::vector<std::vector<double>> kernel;
  for (std::size_t r = 0; r < doc["kernel"].size(); ++r) {
    const auto& row = doc["kernel"][r];
    if (!row.is_array()) throw VocabularyError("kernel row " + std::to_string(r) + " is not an array", r);
    std::vector<double> values;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c].is_number()) throw VocabularyError("kernel entry is not a number" + at_index(r, c), r, c);
      values.push_back(row[c].get<double>());
    }
    kernel.push_back(std::move(values));
  }
  return Vocabulary(std::move(items), std::move(kernel));
}

Vocabulary load_vocabulary(std::istream& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw VocabularyError(std::string("malformed vocabulary document: ") + e.what());
  }
  return vocabulary_from_json(doc);
}

Vocabulary load_vocabulary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw VocabularyError("cannot open vocabulary file '" + path + "'");
  return load_vocabulary(in);
}

Vocabulary generate_vocabulary(const VocabularyGenParams& params) {
  if (params.n < 1) throw std::invalid_argument("gen-vocab: n must be at least 1");
  if (params.dim < 1) throw std::invalid_argument("gen-vocab: dim must be at least 1");
  if (!(params.sharpness > 0.0) || !std::isfinite(params.sharpness)) {
    throw std::invalid_argument("gen-vocab: sharpness must be positive and finite");
  }
  Rng rng(params.seed);
  std::vector<std::vector<double>> vecs(params.n, std::vector<double>(params.dim));
  for (auto& v : vecs) {
    double norm = 0.0;
    do {
      norm = 0.0;
      // Box-Muller from raw uniforms; isotropic Gaussian gives a uniform direction.
      for (std::size_t k = 0; k < params.dim; ++k) {
        const double u1 = 1.0 - rng.uniform01();
        const double u2 = rng.uniform01();
        v[k] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        norm += v[k] * v[k];
      }
    } while (norm < 1e-24);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
  }
  std::vector<std::vector<double>> kernel(params.n, std::vector<double>(params.n, 1.0));
  for (std::size_t i = 0; i < params.n; ++i) {
    for (std::size_t w = i + 1; w < params.n; ++w) {
      double dot = 0.0;
      for (std::size_t k = 0; k < params.dim; ++k) dot += vecs[i][k] * vecs[w][k];
      dot = std::clamp(dot, -1.0, 1.0);
      const double value = std::clamp(std::pow((1.0 + dot) / 2.0, params.sharpness), 0.0, 1.0);
      kernel[i][w] = value;
      kernel[w][i] = value;
    }
  }
  std::vector<std::string> items;
  for (std::size_t i = 0; i < params.n; ++i) items.push_back(generated_word(i));
  return Vocabulary(std::move(items), std::move(kernel));
}

}  // namespace tombandit
