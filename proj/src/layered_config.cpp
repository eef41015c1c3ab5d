#include "tombandit/layered_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace tombandit {

nlohmann::json load_config_file(const std::filesystem::path& path, std::span<const std::string> known_keys) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config file " + path.string() + " must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
      throw std::invalid_argument("unknown config key '" + key + "' in " + path.string());
    }
  }
  return doc;
}

nlohmann::json env_layer(std::span<const std::string> known_keys,
                         const std::function<const char*(const char*)>& lookup) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& key : known_keys) {
    std::string name = kEnvPrefix;
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const char* raw = lookup(name.c_str());
    if (!raw) continue;
    auto parsed = nlohmann::json::parse(raw, nullptr, false);
    if (parsed.is_discarded() || parsed.is_object()) out[key] = std::string(raw);
    else out[key] = std::move(parsed);
  }
  return out;
}

nlohmann::json merge_layers(std::initializer_list<nlohmann::json> layers) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& layer : layers) {
    if (layer.is_null()) continue;
    for (const auto& [key, value] : layer.items()) out[key] = value;
  }
  return out;
}

void split_list_field(nlohmann::json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc[key].is_string()) return;
  const std::string raw = doc[key].get<std::string>();
  nlohmann::json list = nlohmann::json::array();
  std::size_t start = 0;
  while (start <= raw.size()) {
    const auto end = std::min(raw.find(',', start), raw.size());
    std::string part = raw.substr(start, end - start);
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    if (!part.empty()) list.push_back(part);
    start = end + 1;
  }
  doc[key] = std::move(list);
}

}  // namespace tombandit
