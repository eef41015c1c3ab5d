// tombandit: simulate, serve, analyze, gen-vocab.
//
// Settings are layered: built-in defaults < --config file < TOMBANDIT_* env < flags.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tombandit/experiment.hpp"
#include "tombandit/http_service.hpp"
#include "tombandit/layered_config.hpp"
#include "tombandit/results_io.hpp"
#include "tombandit/session.hpp"

using nlohmann::json;
using namespace tombandit;

namespace {

const std::vector<std::string> kKeys = {
    "vocab",       "vocab_size", "dim",     "sharpness",  "vocab_seed", "horizon",  "conditions",
    "user_kind",   "epsilon",    "beta",    "depth",      "targets",    "n_targets", "episodes",
    "seed",        "bootstrap_resamples",   "paired_seeding", "threads", "out",     "listen",
    "data_dir",    "static_dir", "cond_a",  "cond_b",     "turn"};

const std::set<std::string> kStringKeys = {"vocab", "user_kind", "out", "listen", "data_dir", "static_dir",
                                           "cond_a", "cond_b"};

// Raw flag strings, keyed like the config file.
struct FlagLayer {
  std::map<std::string, std::string> raw;

  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    return app.add_option_function<std::string>(
        flag, [this, key](const std::string& v) { raw[key] = v; }, help);
  }

  json to_json() const {
    json out = json::object();
    for (const auto& [key, value] : raw) out[key] = value;
    return out;
  }
};

// Typed view of a merged layer: string keys stay strings, the rest parse as JSON scalars.
json coerce(json doc) {
  for (auto& [key, value] : doc.items()) {
    if (!value.is_string() || kStringKeys.count(key)) continue;
    if (key == "conditions" || key == "targets") continue;
    auto parsed = json::parse(value.get<std::string>(), nullptr, false);
    if (!parsed.is_discarded()) value = parsed;
  }
  split_list_field(doc, "conditions");
  split_list_field(doc, "targets");
  return doc;
}

json layered(const std::string& config_path, const FlagLayer& flags, const json& defaults) {
  json file = json::object();
  if (!config_path.empty()) file = load_config_file(config_path, kKeys);
  const json env = env_layer(kKeys, [](const char* name) { return std::getenv(name); });
  return coerce(merge_layers({defaults, file, env, flags.to_json()}));
}

void add_model_flags(CLI::App& cmd, FlagLayer& flags) {
  flags.add(cmd, "--epsilon", "epsilon", "answer noise in [0, 0.5)");
  flags.add(cmd, "--beta", "beta", "user rationality (Boltzmann inverse temperature)");
  flags.add(cmd, "--depth", "depth", "user look-ahead steps");
}

void add_vocab_gen_flags(CLI::App& cmd, FlagLayer& flags) {
  flags.add(cmd, "--vocab-size", "vocab_size", "items in a generated vocabulary");
  flags.add(cmd, "--dim", "dim", "embedding dimension of a generated vocabulary");
  flags.add(cmd, "--sharpness", "sharpness", "kernel sharpness of a generated vocabulary");
  flags.add(cmd, "--vocab-seed", "vocab_seed", "seed of a generated vocabulary");
}

// Accepts indices or words.
std::vector<ItemIndex> resolve_targets(const json& raw, const Vocabulary& vocab) {
  std::vector<ItemIndex> out;
  for (const auto& t : raw) {
    if (t.is_number_unsigned()) {
      out.push_back(t.get<ItemIndex>());
      continue;
    }
    const auto text = t.get<std::string>();
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
      out.push_back(std::stoul(text));
    } else if (auto idx = vocab.find(text)) {
      out.push_back(*idx);
    } else {
      throw std::invalid_argument("target '" + text + "' is not in the vocabulary");
    }
  }
  return out;
}

int run_simulate(const json& settings) {
  json cfg_doc = settings;
  cfg_doc.erase("out");
  cfg_doc.erase("targets");
  auto config = ExperimentConfig::from_json(cfg_doc);
  const Vocabulary vocab = resolve_vocabulary(config);
  if (settings.contains("targets")) config.targets = resolve_targets(settings["targets"], vocab);
  config.validate(vocab);

  const auto result = run_experiment(config, vocab);
  const auto dir = write_results_dir(result, settings.value("out", std::string("results")));

  const int horizon = config.horizon;
  std::cout << "results: " << dir.string() << "\n";
  std::cout << "vocabulary N=" << vocab.size() << ", horizon T=" << horizon << ", user=" << to_string(config.user.kind)
            << " (beta=" << config.user.beta << ", epsilon=" << config.user.epsilon << ", depth=" << config.user.depth
            << "), episodes per condition=" << result.targets.size() * config.episodes_per_target << "\n\n";
  std::cout << std::left << std::setw(10) << "condition" << std::setw(7) << "level" << std::setw(12)
            << ("mean@" + std::to_string(horizon)) << "95% band\n";
  std::cout << std::fixed << std::setprecision(3);
  for (const auto& c : result.curves) {
    std::cout << std::setw(10) << to_string(c.condition) << std::setw(7)
              << (agency_level(c.condition) ? "L" + std::to_string(agency_level(c.condition)) : std::string("-"))
              << std::setw(12) << c.mean.back() << "[" << c.lower.back() << ", " << c.upper.back() << "]";
    if (c.incomplete) std::cout << "  (" << c.incomplete << " aborted)";
    std::cout << "\n";
  }
  if (!result.differences.empty()) std::cout << "\npaired differences at t=" << horizon << ":\n";
  for (const auto& d : result.differences) {
    std::cout << "  " << to_string(d.a) << " - " << to_string(d.b) << ": " << d.mean.back() << " [" << d.lower.back()
              << ", " << d.upper.back() << "] over " << d.pairs << " pairs\n";
  }
  return result.incomplete() ? 3 : 0;
}

int run_analyze(const std::string& results_path, const json& settings) {
  const auto result = read_result(results_path);
  const auto a = condition_from_string(settings.value("cond_a", std::string("active")));
  const auto b = condition_from_string(settings.value("cond_b", std::string("passive")));
  const int turn = settings.value("turn", 12);
  const auto cmp = compare_conditions(result, a, b, turn);

  std::cout << std::fixed << std::setprecision(4);
  std::cout << to_string(a) << " vs " << to_string(b) << " at turn " << turn << " (" << cmp.pairs << " pairs)\n"
            << "  mean difference " << cmp.mean_difference << ", 95% bootstrap [" << cmp.lower << ", " << cmp.upper
            << "]\n"
            << "  sign test p=" << std::setprecision(6) << cmp.sign_test_p << " (wins " << cmp.wins << ", losses "
            << cmp.losses << ", ties " << cmp.ties << ")\n";

  std::filesystem::path out;
  if (settings.contains("out")) {
    out = settings["out"].get<std::string>();
  } else {
    auto dir = std::filesystem::path(results_path);
    if (!std::filesystem::is_directory(dir)) dir = dir.parent_path();
    out = dir / ("comparison_" + std::string(to_string(a)) + "_" + std::string(to_string(b)) + "_t" +
                 std::to_string(turn) + ".json");
  }
  std::ofstream file(out);
  file << cmp.to_json().dump(2) << "\n";
  if (!file) throw std::runtime_error("cannot write " + out.string());
  std::cout << "comparison: " << out.string() << "\n";
  return 0;
}

int run_gen_vocab(const json& settings) {
  VocabularyGenParams p;
  p.n = settings.value("vocab_size", p.n);
  p.dim = settings.value("dim", p.dim);
  p.sharpness = settings.value("sharpness", p.sharpness);
  p.seed = settings.value("seed", p.seed);
  const auto vocab = generate_vocabulary(p);
  const std::string text = vocab.to_json().dump() + "\n";
  if (settings.contains("out")) {
    std::ofstream file(settings["out"].get<std::string>(), std::ios::binary | std::ios::trunc);
    file << text;
    if (!file) throw std::runtime_error("cannot write " + settings["out"].get<std::string>());
  } else {
    std::cout << text;
  }
  return 0;
}

HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int run_serve(const json& settings) {
  UserModelSpec model;
  model.epsilon = settings.value("epsilon", model.epsilon);
  model.beta = settings.value("beta", model.beta);
  model.depth = settings.value("depth", model.depth);
  model.validate();

  const std::filesystem::path data_dir = settings.value("data_dir", std::string("data"));
  std::map<std::string, Vocabulary> vocabs;
  if (std::filesystem::is_directory(data_dir / "vocabularies")) {
    for (const auto& f : std::filesystem::directory_iterator(data_dir / "vocabularies")) {
      if (f.path().extension() == ".json") vocabs.emplace(f.path().stem().string(), load_vocabulary_file(f.path()));
    }
  }
  json vocab_list = {{"vocab", settings.contains("vocab") ? settings["vocab"] : json::array()}};
  split_list_field(vocab_list, "vocab");
  for (const auto& path : vocab_list["vocab"]) {
    const std::filesystem::path p = path.get<std::string>();
    vocabs.insert_or_assign(p.stem().string(), load_vocabulary_file(p));
  }
  if (vocabs.empty()) {
    VocabularyGenParams gen;
    gen.n = settings.value("vocab_size", gen.n);
    gen.dim = settings.value("dim", gen.dim);
    gen.sharpness = settings.value("sharpness", gen.sharpness);
    gen.seed = settings.value("vocab_seed", gen.seed);
    vocabs.emplace("default", generate_vocabulary(gen));
  }

  SessionManager sessions(std::move(vocabs), SessionStore(data_dir), model);
  const auto recovered = sessions.recover();
  HttpService service(sessions, settings.value("static_dir", std::string()));
  const auto [host, port] = parse_listen_address(settings.value("listen", std::string("127.0.0.1:8080")));

  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving on " << host << ":" << port << " (data dir " << data_dir.string() << ", " << recovered
            << " sessions recovered)\n";
  const bool ok = service.listen(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit user modelling with passive and strategic (theory-of-mind) users"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (same field names as the flags)")
      ->check(CLI::ExistingFile);

  FlagLayer sim_flags;
  auto* sim = app.add_subcommand("simulate", "run a condition sweep with simulated users");
  sim_flags.add(*sim, "--vocab", "vocab", "vocabulary JSON file (default: generated)");
  add_vocab_gen_flags(*sim, sim_flags);
  sim_flags.add(*sim, "--conditions", "conditions", "comma list of active,passive,random");
  sim_flags.add(*sim, "--horizon", "horizon", "questions per episode");
  sim_flags.add(*sim, "--episodes", "episodes", "episodes per target");
  sim_flags.add(*sim, "--targets", "targets", "comma list of target words or indices");
  sim_flags.add(*sim, "--n-targets", "n_targets", "targets sampled when --targets is absent");
  sim_flags.add(*sim, "--user-kind", "user_kind", "simulated user: active or passive");
  add_model_flags(*sim, sim_flags);
  sim_flags.add(*sim, "--seed", "seed", "master seed");
  sim_flags.add(*sim, "--threads", "threads", "worker threads (0 = all cores)");
  sim_flags.add(*sim, "--out", "out", "results root directory");

  FlagLayer serve_flags;
  auto* serve = app.add_subcommand("serve", "run the game service");
  serve_flags.add(*serve, "--listen", "listen", "host:port");
  serve_flags.add(*serve, "--data-dir", "data_dir", "session logs and vocabularies/");
  serve_flags.add(*serve, "--vocab", "vocab", "comma list of vocabulary files");
  serve_flags.add(*serve, "--static-dir", "static_dir", "serve a UI bundle from this directory");
  add_model_flags(*serve, serve_flags);
  add_vocab_gen_flags(*serve, serve_flags);

  FlagLayer an_flags;
  std::string results_path;
  auto* analyze = app.add_subcommand("analyze", "paired comparison of two conditions at one turn");
  analyze->add_option("results", results_path, "result.json or results directory")->required();
  an_flags.add(*analyze, "--cond-a", "cond_a", "first condition (default active)");
  an_flags.add(*analyze, "--cond-b", "cond_b", "second condition (default passive)");
  an_flags.add(*analyze, "--turn", "turn", "turn to compare (default 12)");
  an_flags.add(*analyze, "--out", "out", "comparison JSON path");

  FlagLayer gen_flags;
  auto* gen = app.add_subcommand("gen-vocab", "generate a random vocabulary file");
  gen_flags.add(*gen, "--n", "vocab_size", "number of items");
  gen_flags.add(*gen, "--dim", "dim", "embedding dimension");
  gen_flags.add(*gen, "--sharpness", "sharpness", "kernel sharpness");
  gen_flags.add(*gen, "--seed", "seed", "random seed");
  gen_flags.add(*gen, "--out", "out", "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(layered(config_path, sim_flags, json::object()));
    if (*serve) return run_serve(layered(config_path, serve_flags, json::object()));
    if (*analyze) return run_analyze(results_path, layered(config_path, an_flags, json::object()));
    if (*gen) return run_gen_vocab(layered(config_path, gen_flags, json::object()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
