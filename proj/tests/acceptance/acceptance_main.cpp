// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: tombandit_acceptance <path-to-tombandit-cli> <work-dir>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracle.hpp"
#include "tombandit/experiment.hpp"
#include "tombandit/session.hpp"
#include "tombandit/user_model.hpp"

using namespace tombandit;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kOracleTolerance = 1e-9;
constexpr double kReplayTolerance = 1e-12;
constexpr double kShiftTolerance = 1e-12;
constexpr double kUniformTolerance = 1e-15;
constexpr double kControlRatio = 0.25;
constexpr int kPropertyStates = 10000;
constexpr double kOracleBudgetS = 10.0;
constexpr double kPropertyBudgetS = 30.0;
constexpr double kExperimentBudgetS = 120.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& run, double budget_s = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = run();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line.precision(3);
  line << std::fixed;
  if (budget_s > 0.0 && secs > budget_s) {
    out.pass = false;
    out.detail += " (over budget " + std::to_string(static_cast<int>(budget_s)) + " s)";
  }
  line << (out.pass ? "PASS " : "FAIL ") << name << " [" << secs << " s] " << out.detail;
  std::cout << line.str() << std::endl;
  if (!out.pass) ++failures;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string describe(const Comparison& c) {
  return std::string(to_string(c.a)) + "-" + std::string(to_string(c.b)) + "@" + std::to_string(c.turn) + " " +
         fmt(c.mean_difference) + " [" + fmt(c.lower) + ", " + fmt(c.upper) + "]";
}

Vocabulary random_vocab(std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> k(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = i + 1; w < n; ++w) k[i][w] = k[w][i] = rng.uniform01();
  }
  std::vector<std::string> items;
  for (std::size_t i = 0; i < n; ++i) items.push_back("w" + std::to_string(i));
  return Vocabulary(items, k);
}

oracle::Matrix matrix(const Vocabulary& v) {
  oracle::Matrix m(v.size(), std::vector<double>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t w = 0; w < v.size(); ++w) m[i][w] = v.kernel(i, w);
  }
  return m;
}

// Every item order of length min(3, n) and every answer pattern, checking each prefix.
Outcome oracle_equivalence() {
  Rng rng(4001);
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int draw = 0; draw < 6; ++draw) {
      const auto v = random_vocab(n, rng);
      const auto m = matrix(v);
      const std::size_t horizon = std::min<std::size_t>(3, n);
      std::vector<ItemIndex> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::set<std::vector<ItemIndex>> sequences;
      do sequences.insert(std::vector<ItemIndex>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(horizon)));
      while (std::next_permutation(order.begin(), order.end()));

      for (double eps : {0.05, 0.1}) {
        for (int depth : {1, 2}) {
          const double beta = draw % 2 ? 5.0 : 1.0 + 9.0 * rng.uniform01();
          for (bool active : {false, true}) {
            if (!active && depth > 1) continue;
            const UserModelSpec spec{active ? UserKind::active : UserKind::passive, eps, beta, depth};
            for (const auto& seq : sequences) {
              for (unsigned pattern = 0; pattern < (1u << horizon); ++pattern) {
                auto post = TargetPosterior::uniform(n);
                auto nested = post;
                AskedSet asked(n);
                std::vector<oracle::Round> rounds;
                for (std::size_t t = 0; t < horizon; ++t) {
                  const int answer = static_cast<int>((pattern >> t) & 1u);
                  const FeedbackEvent ev{static_cast<int>(t + 1), seq[t], answer};
                  post = belief_update(post, ev, spec, v, asked, nested);
                  nested = passive_update(nested, seq[t], answer, v, eps);
                  asked.insert(seq[t]);
                  rounds.push_back({seq[t], answer});
                  const auto expected = oracle::posterior(m, rounds, active, eps, beta, depth);
                  for (std::size_t w = 0; w < n; ++w) {
                    worst = std::max(worst, std::abs(post[w] - expected[w]));
                    ++checked;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return {worst <= kOracleTolerance, std::to_string(checked) + " posterior entries, max |diff| " + sci(worst)};
}

struct LikelihoodState {
  Vocabulary vocab;
  TargetPosterior posterior;
  AskedSet asked;
  ItemIndex item;
  ItemIndex target;
  double eps;
};

LikelihoodState random_state(Rng& rng) {
  const std::size_t n = 1 + rng.below(8);
  auto vocab = random_vocab(n, rng);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = rng.uniform01() + 1e-6);
  for (auto& x : p) x /= s;
  AskedSet asked(n);
  const ItemIndex item = rng.below(n);
  for (std::size_t j = 0, k = rng.below(n); j < k; ++j) {
    const auto i = rng.below(n);
    if (i != item) asked.insert(i);
  }
  const double eps = 0.2 * rng.uniform01();
  return {std::move(vocab), TargetPosterior(p), asked, item, rng.below(n), eps};
}

Outcome likelihood_properties() {
  Rng rng(4002);
  std::size_t complete = 0, uniform = 0, monotone = 0, shift = 0;
  for (int k = 0; k < kPropertyStates; ++k) {
    const auto s = random_state(rng);
    const int depth = 1 + static_cast<int>(rng.below(2));
    const double beta = 20.0 * rng.uniform01();
    const UserModelSpec active{UserKind::active, s.eps, beta, depth};

    const double a0 = active_likelihood(0, s.item, s.target, s.vocab, s.posterior, s.asked, active);
    const double a1 = active_likelihood(1, s.item, s.target, s.vocab, s.posterior, s.asked, active);
    const double p0 = passive_likelihood(0, s.item, s.target, s.vocab, s.eps);
    const double p1 = passive_likelihood(1, s.item, s.target, s.vocab, s.eps);
    complete += (a0 + a1 == 1.0) && (p0 + p1 == 1.0);

    const UserModelSpec flat{UserKind::active, s.eps, 0.0, depth};
    uniform += std::abs(active_likelihood(1, s.item, s.target, s.vocab, s.posterior, s.asked, flat) - 0.5) <=
               kUniformTolerance;

    const auto values = active_feedback_values(s.item, s.target, s.vocab, s.posterior, s.asked, active);
    const double b1 = 20.0 * rng.uniform01();
    const double b2 = b1 + 20.0 * rng.uniform01();
    const double y1 = boltzmann_yes_probability(values.v0, values.v1, b1);
    const double y2 = boltzmann_yes_probability(values.v0, values.v1, b2);
    const bool ok = values.v1 > values.v0   ? y2 >= y1
                    : values.v1 < values.v0 ? y2 <= y1
                                            : (y1 == 0.5 && y2 == 0.5);
    monotone += ok;

    const double c = 10.0 * (rng.uniform01() - 0.5);
    shift += std::abs(boltzmann_yes_probability(values.v0 + c, values.v1 + c, beta) -
                      boltzmann_yes_probability(values.v0, values.v1, beta)) <= kShiftTolerance;
  }
  const auto n = static_cast<std::size_t>(kPropertyStates);
  const bool pass = complete == n && uniform == n && monotone == n && shift == n;
  return {pass, "completeness " + std::to_string(complete) + "/" + std::to_string(n) + ", beta=0 uniform " +
                    std::to_string(uniform) + ", beta-monotone " + std::to_string(monotone) + ", shift-invariant " +
                    std::to_string(shift)};
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;  // generated N=50, T=20, beta 5, eps 0.05, 20 targets x 10 episodes, seed 2019
  cfg.threads = 0;
  return cfg;
}

std::optional<Comparison> strategic_gap;

Outcome replication() {
  const auto cfg = default_experiment();
  if (cfg.vocab_gen.n != 50 || cfg.horizon != 20 || cfg.user.beta != 5.0 || cfg.user.epsilon != 0.05 ||
      cfg.user.kind != UserKind::active || cfg.n_targets * cfg.episodes_per_target < 200) {
    return {false, "default configuration drifted"};
  }
  const auto r = run_experiment(cfg);
  if (r.incomplete()) return {false, "aborted episodes in the default run"};
  const auto ap20 = compare_conditions(r, Condition::active, Condition::passive, 20);
  const auto pr20 = compare_conditions(r, Condition::passive, Condition::random, 20);
  const auto ap12 = compare_conditions(r, Condition::active, Condition::passive, 12);
  strategic_gap = ap20;
  const bool pass = ap20.pairs >= 200 && ap20.lower > 0.0 && pr20.lower > 0.0 && ap12.lower > 0.0;
  return {pass, std::to_string(ap20.pairs) + " pairs; " + describe(ap20) + "; " + describe(pr20) + "; " +
                    describe(ap12) + " (sign test p " + fmt(ap12.sign_test_p) + ")"};
}

Outcome control() {
  if (!strategic_gap) return {false, "needs the replication run"};
  auto cfg = default_experiment();
  cfg.user.kind = UserKind::passive;
  cfg.conditions = {Condition::active, Condition::passive};
  const auto r = run_experiment(cfg);
  const auto ap20 = compare_conditions(r, Condition::active, Condition::passive, 20);
  const bool indistinguishable = !ap20.excludes_zero();
  const double ratio = ap20.mean_difference / strategic_gap->mean_difference;
  const bool pass = indistinguishable || ratio < kControlRatio;
  return {pass, "passive user " + describe(ap20) + "; strategic gap " + fmt(strategic_gap->mean_difference) +
                    "; signed ratio " + fmt(ratio) + ", |ratio| " + fmt(std::abs(ratio)) +
                    (indistinguishable ? "; interval contains 0" : "")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path only_result(const fs::path& root) {
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().filename() == "result.json") found.push_back(e.path());
  }
  if (found.size() != 1) throw std::runtime_error("expected one result.json under " + root.string());
  return found.front();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    const auto out = work / ("determinism_" + std::to_string(run));
    fs::remove_all(out);
    // Different thread counts; the result must not depend on scheduling.
    const std::string cmd = "\"" + cli + "\" simulate --seed 7 --threads " + (run ? "4" : "1") + " --out \"" +
                            out.string() + "\" > \"" + (work / "determinism.log").string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "simulate failed: " + cmd};
    bytes[run] = slurp(only_result(out));
  }
  return {!bytes[0].empty() && bytes[0] == bytes[1], std::to_string(bytes[0].size()) + " bytes per result.json"};
}

Outcome service_state_machine(const fs::path& work) {
  const auto dir = work / "sessions";
  fs::remove_all(dir);
  VocabularyGenParams gen;
  gen.n = 20;
  gen.seed = 11;
  std::map<std::string, Vocabulary> vocabs;
  vocabs.emplace("gen", generate_vocabulary(gen));
  const UserModelSpec model{UserKind::active, 0.05, 5.0, 1};

  constexpr int kSessions = 12;
  constexpr int kThreads = 8;
  constexpr int kOps = 400;

  std::vector<std::string> ids;
  std::size_t violations = 0;
  std::size_t accepted_total = 0;
  std::size_t fetches = 0;
  {
    SessionManager mgr(vocabs, SessionStore(dir, false), model);
    for (int s = 0; s < kSessions; ++s) {
      ids.push_back(mgr.create({static_cast<Condition>(s % 3), "gen", 20, ItemIndex(s)}).id);
    }
    std::mutex log_mutex;
    std::map<std::string, std::map<int, std::set<ItemIndex>>> fetched;  // id -> turn -> items seen
    std::map<std::string, std::vector<int>> accepted;                  // id -> turns accepted
    std::atomic<std::size_t> bad{0};

    std::vector<std::thread> pool;
    for (int th = 0; th < kThreads; ++th) {
      pool.emplace_back([&, th] {
        Rng rng(derive_seed(4006, {static_cast<std::uint64_t>(th)}));
        for (int op = 0; op < kOps; ++op) {
          const auto& id = ids[rng.below(ids.size())];
          try {
            if (rng.bernoulli(0.6)) {
              const auto q = mgr.next_question(id);
              std::lock_guard lock(log_mutex);
              fetched[id][q.turn].insert(q.item);
            } else {
              const auto a = mgr.submit_answer(id, static_cast<int>(rng.below(2)));
              std::lock_guard lock(log_mutex);
              accepted[id].push_back(a.turn);
            }
          } catch (const ServiceError& e) {
            if (e.kind() != ErrorKind::conflict) ++bad;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    violations += bad;

    for (const auto& id : ids) {
      const auto rec = mgr.snapshot(id);
      auto turns = accepted[id];
      std::sort(turns.begin(), turns.end());
      accepted_total += turns.size();
      // Linearised: answers accepted for turns 1..k exactly once each, matching the log.
      if (turns.size() != rec.events.size()) ++violations;
      for (std::size_t k = 0; k < turns.size(); ++k) violations += turns[k] != static_cast<int>(k + 1);
      // Idempotent fetches: one item per turn, and it is the item that was answered.
      for (const auto& [turn, items] : fetched[id]) {
        fetches += items.size();
        if (items.size() != 1) ++violations;
        const auto t = static_cast<std::size_t>(turn);
        if (t <= rec.events.size() && rec.events[t - 1].item != *items.begin()) ++violations;
        if (t == rec.events.size() + 1 && rec.pending != *items.begin()) ++violations;
      }
    }

    SessionManager replayed(vocabs, SessionStore(dir, false), model);
    if (replayed.recover() != ids.size()) ++violations;
    double worst = 0.0;
    for (const auto& id : ids) {
      const auto a = mgr.snapshot(id);
      const auto b = replayed.snapshot(id);
      if (a.status != b.status || a.events != b.events || a.pending != b.pending || !(a.asked == b.asked)) ++violations;
      for (std::size_t w = 0; w < a.posterior.size(); ++w) {
        worst = std::max({worst, std::abs(a.posterior[w] - b.posterior[w]), std::abs(a.nested[w] - b.nested[w])});
      }
    }
    if (worst > kReplayTolerance) ++violations;
    fs::remove_all(dir);
    return {violations == 0, std::to_string(kThreads) + " threads x " + std::to_string(kOps) + " ops on " +
                                 std::to_string(kSessions) + " sessions; " + std::to_string(accepted_total) +
                                 " answers accepted; replay max |diff| " + sci(worst) + "; " +
                                 std::to_string(violations) + " violations"};
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " <tombandit-cli> <work-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  report("oracle-equivalence", oracle_equivalence, kOracleBudgetS);
  report("likelihood-properties", likelihood_properties, kPropertyBudgetS);
  report("qualitative-replication", replication, kExperimentBudgetS);
  report("control-passive-user", control, kExperimentBudgetS);
  report("determinism", [&] { return determinism(cli, work); });
  report("service-state-machine", [&] { return service_state_machine(work); });

  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing criteria" << std::endl;
  return failures ? 1 : 0;
}
