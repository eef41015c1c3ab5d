#include <doctest.h>

#include <sstream>

#include "test_util.hpp"
#include "tombandit/vocabulary.hpp"

using namespace tombandit;
using tombandit::testing::fixture;

TEST_CASE("three-item fixture loads in file order") {
  const auto v = load_vocabulary_file(fixture("three_words.json"));
  REQUIRE(v.size() == 3);
  CHECK(v.items() == std::vector<std::string>{"cat", "dog", "car"});
  // Hand-read rows of the fixture file.
  const double expected[3][3] = {{1, 0.5, 0}, {0.5, 1, 0.2}, {0, 0.2, 1}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t w = 0; w < 3; ++w) CHECK(v.relevance(i, w) == expected[i][w]);
  }
}

TEST_CASE("single-item vocabulary") {
  const auto v = load_vocabulary_file(fixture("one_word.json"));
  CHECK(v.size() == 1);
  CHECK(v.relevance(0, 0) == 1.0);
}

TEST_CASE("relevance reads the kernel") {
  const auto v = tombandit::testing::three_words();
  CHECK(v.relevance(0, 0) == 1.0);
  CHECK(v.relevance(0, 1) == 0.5);
  CHECK(v.relevance(0, 2) == 0.0);
  CHECK_THROWS_AS(v.relevance(3, 0), std::out_of_range);
  CHECK_THROWS_AS(v.relevance(0, 3), std::out_of_range);
}

TEST_CASE("asymmetric kernel names the offending indices") {
  try {
    load_vocabulary_file(fixture("asymmetric.json"));
    FAIL("expected an asymmetry error");
  } catch (const VocabularyError& e) {
    CHECK(e.row() == 0u);
    CHECK(e.col() == 1u);
    CHECK(std::string(e.what()).find("asymmetric") != std::string::npos);
  }
}

namespace {

VocabularyError parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    load_vocabulary(in);
  } catch (const VocabularyError& e) {
    return e;
  }
  FAIL("expected a vocabulary error for " << text);
  return VocabularyError("unreachable");
}

}  // namespace

TEST_CASE("invalid documents are rejected") {
  SUBCASE("malformed JSON") { parse_error("{\"items\": [\"a\""); }
  SUBCASE("missing kernel") { parse_error(R"({"items": ["a"]})"); }
  SUBCASE("empty vocabulary") { parse_error(R"({"items": [], "kernel": []})"); }
  SUBCASE("non-square") {
    const auto e = parse_error(R"({"items": ["a","b"], "kernel": [[1,0],[0]]})");
    CHECK(e.row() == 1u);
  }
  SUBCASE("row count mismatch") { parse_error(R"({"items": ["a","b"], "kernel": [[1,0]]})"); }
  SUBCASE("entry above one") {
    const auto e = parse_error(R"({"items": ["a","b"], "kernel": [[1,1.5],[1.5,1]]})");
    CHECK(e.row() == 0u);
    CHECK(e.col() == 1u);
  }
  SUBCASE("negative entry") { parse_error(R"({"items": ["a","b"], "kernel": [[1,-0.1],[-0.1,1]]})"); }
  SUBCASE("diagonal not one") {
    const auto e = parse_error(R"({"items": ["a","b"], "kernel": [[1,0],[0,0.9]]})");
    CHECK(e.row() == 1u);
    CHECK(e.col() == 1u);
  }
  SUBCASE("non-numeric entry") { parse_error(R"({"items": ["a"], "kernel": [["x"]]})"); }
}

TEST_CASE("asymmetry within tolerance is accepted") {
  std::istringstream in(R"({"items": ["a","b"], "kernel": [[1,0.3],[0.3000000000001,1]]})");
  CHECK(load_vocabulary(in).size() == 2);
}

TEST_CASE("generated kernels satisfy the loader's invariants") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    VocabularyGenParams p;
    p.n = 1 + seed % 17;
    p.dim = 1 + seed % 6;
    p.sharpness = 0.5 + static_cast<double>(seed % 5);
    p.seed = seed;
    const auto v = generate_vocabulary(p);
    std::istringstream in(v.to_json().dump());
    const auto reloaded = load_vocabulary(in);
    CHECK(reloaded.size() == p.n);
    CHECK(reloaded.to_json() == v.to_json());
  }
}

TEST_CASE("generator edge cases") {
  VocabularyGenParams p;
  p.n = 1;
  CHECK(generate_vocabulary(p).to_json()["kernel"] == nlohmann::json::parse("[[1.0]]"));
  p.n = 30;
  p.seed = 7;
  CHECK(generate_vocabulary(p).to_json().dump() == generate_vocabulary(p).to_json().dump());
  p.n = 0;
  CHECK_THROWS_AS(generate_vocabulary(p), std::invalid_argument);
}
