#pragma once

#include <string>

#include "tombandit/vocabulary.hpp"

namespace tombandit::testing {

inline std::string fixture(const std::string& name) { return std::string(TOMBANDIT_FIXTURES) + "/" + name; }

/// items cat, dog, car; kernel rows [1,.5,0] [.5,1,.2] [0,.2,1]
inline Vocabulary three_words() { return load_vocabulary_file(fixture("three_words.json")); }

}  // namespace tombandit::testing
