#include "tombandit/results_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tombandit {

namespace {

using nlohmann::json;

json events_json(const std::vector<FeedbackEvent>& events) {
  json out = json::array();
  for (const auto& e : events) out.push_back({{"turn", e.turn}, {"item", e.item}, {"answer", e.answer}});
  return out;
}

json episode_json(const EpisodeLog& e) {
  json j = {{"condition", std::string(to_string(e.condition))},
            {"target", e.target},
            {"episode", e.episode},
            {"seed", e.seed},
            {"events", events_json(e.events)},
            {"rewards", e.rewards},
            {"cumulative_reward", e.cumulative},
            {"aborted", e.aborted}};
  if (e.aborted) j["error"] = e.error;
  return j;
}

EpisodeLog episode_from_json(const json& j) {
  EpisodeLog e;
  e.condition = condition_from_string(j.at("condition").get<std::string>());
  e.target = j.at("target").get<ItemIndex>();
  e.episode = j.at("episode").get<std::size_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& ev : j.at("events")) {
    e.events.push_back({ev.at("turn").get<int>(), ev.at("item").get<ItemIndex>(), ev.at("answer").get<int>()});
  }
  e.rewards = j.at("rewards").get<std::vector<double>>();
  e.cumulative = j.at("cumulative_reward").get<std::vector<double>>();
  e.aborted = j.at("aborted").get<bool>();
  e.error = j.value("error", std::string());
  return e;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

json result_to_json(const ExperimentResult& result) {
  json curves = json::array();
  for (const auto& c : result.curves) {
    curves.push_back({{"condition", std::string(to_string(c.condition))},
                      {"agency_level", agency_level(c.condition)},
                      {"mean", c.mean},
                      {"lower", c.lower},
                      {"upper", c.upper},
                      {"complete", c.complete},
                      {"incomplete", c.incomplete}});
  }
  json diffs = json::array();
  for (const auto& d : result.differences) {
    diffs.push_back({{"condition_a", std::string(to_string(d.a))},
                     {"condition_b", std::string(to_string(d.b))},
                     {"mean", d.mean},
                     {"lower", d.lower},
                     {"upper", d.upper},
                     {"pairs", d.pairs}});
  }
  json episodes = json::array();
  for (const auto& e : result.episodes) episodes.push_back(episode_json(e));
  return {{"config", result.config.to_json()},
          {"config_hash", result.config_hash},
          {"vocab_size", result.vocab_size},
          {"targets", result.targets},
          {"incomplete", result.incomplete()},
          {"curves", curves},
          {"paired_differences", diffs},
          {"episodes", episodes}};
}

ExperimentResult result_from_json(const json& doc) {
  ExperimentResult r;
  try {
    r.config = ExperimentConfig::from_json(doc.at("config"));
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.vocab_size = doc.at("vocab_size").get<std::size_t>();
    r.targets = doc.at("targets").get<std::vector<ItemIndex>>();
    for (const auto& c : doc.at("curves")) {
      ConditionCurve curve;
      curve.condition = condition_from_string(c.at("condition").get<std::string>());
      curve.mean = c.at("mean").get<std::vector<double>>();
      curve.lower = c.at("lower").get<std::vector<double>>();
      curve.upper = c.at("upper").get<std::vector<double>>();
      curve.complete = c.at("complete").get<std::size_t>();
      curve.incomplete = c.at("incomplete").get<std::size_t>();
      r.curves.push_back(std::move(curve));
    }
    for (const auto& d : doc.at("paired_differences")) {
      PairedDifference diff;
      diff.a = condition_from_string(d.at("condition_a").get<std::string>());
      diff.b = condition_from_string(d.at("condition_b").get<std::string>());
      diff.mean = d.at("mean").get<std::vector<double>>();
      diff.lower = d.at("lower").get<std::vector<double>>();
      diff.upper = d.at("upper").get<std::vector<double>>();
      diff.pairs = d.at("pairs").get<std::size_t>();
      r.differences.push_back(std::move(diff));
    }
    for (const auto& e : doc.at("episodes")) r.episodes.push_back(episode_from_json(e));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result document: ") + e.what());
  }
  return r;
}

void write_csv(const ExperimentResult& result, std::ostream& sink) {
  sink << "condition,target,episode,turn,item,answer,reward,cumulative_reward\n";
  for (const auto& e : result.episodes) {
    for (std::size_t k = 0; k < e.events.size(); ++k) {
      const auto& ev = e.events[k];
      sink << to_string(e.condition) << ',' << e.target << ',' << e.episode << ',' << ev.turn << ',' << ev.item << ','
           << ev.answer << ',' << fmt_double(e.rewards[k]) << ',' << fmt_double(e.cumulative[k]) << '\n';
    }
  }
}

void export_results(const ExperimentResult& result, ExportFormat format, std::ostream& sink) {
  if (format == ExportFormat::csv) write_csv(result, sink);
  else sink << result_to_json(result).dump(2) << '\n';
  sink.flush();
  if (!sink) throw std::runtime_error("failed writing results");
}

void write_episodes_jsonl(const ExperimentResult& result, std::ostream& sink) {
  for (const auto& e : result.episodes) {
    auto j = episode_json(e);
    j["wall_time_ms"] = e.wall_time_ms;
    sink << j.dump() << '\n';
  }
}

std::filesystem::path write_results_dir(const ExperimentResult& result, const std::filesystem::path& root) {
  const auto dir = root / result.config_hash;
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("result.json");
    export_results(result, ExportFormat::json, out);
  }
  {
    auto out = open("curves.csv");
    export_results(result, ExportFormat::csv, out);
  }
  {
    auto out = open("episodes.jsonl");
    write_episodes_jsonl(result, out);
    if (!out) throw std::runtime_error("failed writing episodes.jsonl");
  }
  return dir;
}

ExperimentResult read_result(const std::filesystem::path& path) {
  auto file = path;
  if (std::filesystem::is_directory(file)) file /= "result.json";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open results file " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed result document: ") + e.what());
  }
  return result_from_json(doc);
}

}  // namespace tombandit
