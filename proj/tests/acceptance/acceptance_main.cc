// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "recipemc/cli.h"
#include "recipemc/evaluation.h"
#include "recipemc/mcts.h"
#include "recipemc/remote_model.h"
#include "recipemc/rewards.h"
#include "recipemc/synthetic_corpus.h"
#include "test_support.h"

using namespace recipemc;
namespace ts = testing_support;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Deterministic pseudo-random value in [lo, hi) for a text.
double hashed_value(std::string_view text, std::uint64_t salt, double lo, double hi) {
  std::uint64_t h = 1469598103934665603ull ^ salt;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ull;
  h ^= h >> 29;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 32;
  return lo + (hi - lo) * static_cast<double>(h >> 11) * 0x1.0p-53;
}

// ---- 1: metric oracles ----

Outcome metric_oracles() {
  Clock clock;
  std::mt19937_64 rng(2024);
  const std::vector<std::string> words{"the", "cat", "sat", "on", "mat", "salt", "rice", "a", "red", "flour"};
  const ConstituentLexicon lex({"flour", "garlic", "mat", "rice", "salt"});
  constexpr int kCases = 250;
  int bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto c = ts::random_text(rng, words, 14), r = ts::random_text(rng, words, 14);
    if (std::abs(rouge_n(c, r, 1) - ts::oracle_rouge(c, r, 1)) > 1e-9) ++bad;
    if (std::abs(rouge_n(c, r, 2) - ts::oracle_rouge(c, r, 2)) > 1e-9) ++bad;
    const double want = ts::oracle_bleu(c, r);
    if (std::abs(bleu(c, r) - want) > 1e-9 * std::max(1.0, want)) ++bad;

    // Repetition: single-word entries, so occurrences are whole-word counts.
    std::map<std::string, int> counts;
    for (const auto& w : ts::oracle_words(c)) {
      if (lex.contains(w)) ++counts[w];
    }
    double rep = 0;
    for (const auto& [w, n] : counts) rep += n - 1;
    if (repetition_metric(c, lex) != rep) ++bad;
  }

  // F1 over random batches of constituent sets.
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = 1 + rng() % 4;
    std::vector<std::string> gen, truth;
    double ps = 0, rs = 0;
    for (std::size_t s = 0; s < n; ++s) {
      std::set<std::string> g, t;
      std::string gt, tt;
      for (std::size_t k = 0, m = rng() % 4; k < m; ++k) {
        const auto& e = lex.entries()[rng() % lex.size()];
        g.insert(e);
        gt += (k ? "; 1 cup " : "1 cup ") + e;
      }
      for (std::size_t k = 0, m = rng() % 4; k < m; ++k) {
        const auto& e = lex.entries()[rng() % lex.size()];
        t.insert(e);
        tt += (k ? "; 2 tsp " : "2 tsp ") + e;
      }
      std::size_t inter = 0;
      for (const auto& e : g) inter += t.count(e);
      ps += g.empty() ? 1.0 : static_cast<double>(inter) / g.size();
      rs += t.empty() ? 1.0 : static_cast<double>(inter) / t.size();
      gen.push_back(gt);
      truth.push_back(tt);
    }
    const double p = ps / n, r = rs / n, f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (std::abs(f1_score(gen, truth, lex).f1 - f) > 1e-9) ++bad;
  }

  // Perplexity from the probability tables directly.
  for (int i = 0; i < kCases; ++i) {
    std::vector<double> base(10, 0.0);
    ts::TableModel::Table table;
    auto random_row = [&] {
      std::vector<double> row(10, 0.0);
      double z = 0;
      for (int k = 7; k < 10; ++k) z += row[k] = 0.05 + static_cast<double>(rng() % 1000) / 1000.0;
      for (int k = 7; k < 10; ++k) row[k] /= z;
      return row;
    };
    base = random_row();
    for (TokenId t = 7; t < 10; ++t) table[t] = random_row();
    const ts::TableModel model(ts::make_vocab({"a", "b", "c"}), base, table);
    std::vector<ScoredSequence> seqs;
    double nll = 0;
    std::size_t count = 0;
    for (std::size_t s = 0, m = 1 + rng() % 3; s < m; ++s) {
      ScoredSequence q{{2}, 1};
      for (std::size_t k = 0, len = 1 + rng() % 6; k < len; ++k) {
        const TokenId tok = static_cast<TokenId>(7 + rng() % 3);
        const auto& row = q.tokens.back() == 2 ? base : table[q.tokens.back()];
        nll -= std::log(row[tok]);
        ++count;
        q.tokens.push_back(tok);
      }
      seqs.push_back(q);
    }
    const double want = std::exp(nll / static_cast<double>(count));
    if (std::abs(perplexity(model, seqs) - want) > 1e-9 * want) ++bad;
  }
  const double secs = clock.seconds();
  return {bad == 0 && secs < 10.0, std::to_string(bad) + " mismatches over " + std::to_string(kCases) +
                                       " cases per metric, " + fmt(secs, 2) + " s"};
}

// ---- 2: reward examples ----

Outcome reward_examples() {
  int bad = 0;
  auto check = [&](double got, double want) {
    if (std::abs(got - want) > 1e-9) ++bad;
  };
  {
    const ConstituentLexicon lex({"sausage", "shrimp", "ham", "chicken", "garlic", "salt", "celery"});
    check(name_ingredient_coherence(
              "John And Sarah’s Best Sausage, Shrimp, Ham And Chicken Jambalaya",
              "4 celery ribs, chopped; 3-4 lbs chicken thighs; 1 teaspoon black pepper; 2 tablespoons garlic; "
              "1 lb smoked sausage; 1 cup ham, diced; 2 teaspoons salt",
              lex),
          0.75);
  }
  {
    const std::string ingredients =
        "1 1/2 tablespoons mayonnaise; 1 tablespoon minced green onion; cooking spray; 1 cup cornmeal; "
        "1/4 cup grated pepper Jack cheese; 1/2 teaspoon baking soda; 1/2 cup grated pepper Jack cheese; "
        "1/4 teaspoon Worcestershire sauce; 1/2 cup melted butter; 1 cup buttermilk; 8 ounces cooked crabmeat; "
        "2 eggs; salt to taste; 1 cup all-purpose flour; 1 teaspoon Asian chili paste (sambal); "
        "1 teaspoon fresh grated lemon zest; 1/2 teaspoon salt";
    const std::string instructions =
        "Preheat the oven to 400 degrees F. Spray 12 muffin cups with cooking spray. Combine cornmeal, flour, "
        "baking soda, and salt in a large bowl. Whisk together buttermilk, butter, eggs, pepper Jack cheese, "
        "mayonnaise, chili paste or sambal, green onion, and Worcestershire sauce in a separate bowl. "
        "Fold in the crabmeat.";
    std::vector<std::string> entries{"mayonnaise", "green onion", "cooking spray", "cornmeal",  "pepper jack cheese",
                                     "baking soda", "worcestershire", "sauce",    "butter",    "buttermilk",
                                     "crabmeat",   "eggs",          "flour",        "chili paste", "sambal",
                                     "lemon zest"};
    const ConstituentLexicon no_salt(entries);
    check(constituent_repetition_penalty(ingredients, no_salt), std::exp(-1.0));
    check(std::round(std::exp(-1.0) * 1e6) / 1e6, 0.367879);
    entries.push_back("salt");
    const ConstituentLexicon with_salt(entries);
    check(ingredients_instructions_coherence(ingredients, instructions, with_salt), 16.0 / 17.0);
  }
  check(special_char_penalty("mix - then - serve!"), std::exp(-1.0));
  {
    const auto lex = std::make_shared<const ConstituentLexicon>(std::vector<std::string>{"salt", "flour", "pepper"});
    const auto spec = RewardSpec::defaults(TaskKind::kIngredientsFromName, lex);
    const double q = spec.combine(
        "<|startofname|>Salt Pepper Bread<|endofname|><|startofingr|>1 tsp salt; 2 cups flour; 1 cup flour"
        "<|endofingr|>");
    check(q, 0.30 * 0.5 + 0.45 * std::exp(-1.0) + 0.25);
    // 0.5656 is the same sum with e^-1 rounded to 0.3679 first; the exact sum
    // is 0.565546.
    check(std::round((0.30 * 0.5 + 0.45 * 0.3679 + 0.25) * 1e4) / 1e4, 0.5656);
    if (std::abs(q - 0.5656) > 1e-4) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " mismatches"};
}

// ---- 3: MCTS against brute force ----

struct ToyInstance {
  std::unique_ptr<ts::TableModel> model;
  std::uint64_t salt;
};

ToyInstance make_toy(std::mt19937_64& rng) {
  // Tokens a, b and the stop tag (id 3).
  auto row = [&] {
    std::vector<double> r(9, 0.0);
    double z = 0;
    for (int k : {3, 7, 8}) z += r[k] = 0.05 + static_cast<double>(rng() % 1000) / 1000.0;
    for (int k : {3, 7, 8}) r[k] /= z;
    return r;
  };
  ts::TableModel::Table table;
  const auto base = row();
  for (TokenId t = 7; t < 9; ++t) table[t] = row();
  return {std::make_unique<ts::TableModel>(ts::make_vocab({"a", "b"}), base, table), rng()};
}

// First token of the highest-reward complete continuation of length <= depth.
TokenId brute_force_first(const ts::TableModel& m, const std::function<double(std::string_view)>& reward,
                          int depth) {
  double best = -1;
  TokenId first = -1;
  std::vector<TokenId> seq{2};
  std::function<void()> walk = [&] {
    const std::size_t generated = seq.size() - 1;
    if (generated > 0 && (seq.back() == 3 || static_cast<int>(generated) == depth)) {
      const double v = reward(m.decode(seq));
      if (v > best) {
        best = v;
        first = seq[1];
      }
      return;
    }
    for (TokenId t : {3, 7, 8}) {
      seq.push_back(t);
      walk();
      seq.pop_back();
    }
  };
  walk();
  return first;
}

Outcome mcts_brute_force() {
  Clock clock;
  std::mt19937_64 rng(7);
  constexpr int kInstances = 60, kDepth = 3;
  int agree_c0 = 0, agree_c1 = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto toy = make_toy(rng);
    const auto reward = [salt = toy.salt](std::string_view t) { return hashed_value(t, salt, 0.05, 1.0); };
    const TokenId want = brute_force_first(*toy.model, reward, kDepth);
    for (double c : {0.0, 1.0}) {
      GenerationConfig cfg;
      cfg.exploration_c = c;
      cfg.iterations = 200;
      cfg.expansion_k = 5;
      cfg.nucleus_p = 1.0;
      cfg.rollout_t = kDepth;
      cfg.max_tokens = kDepth;
      cfg.rng_seed = static_cast<std::uint64_t>(i);
      MctsGenerator gen(*toy.model, reward, cfg);
      const std::vector<TokenId> prompt{2};
      gen.reset(prompt);
      for (int it = 0; it < cfg.iterations; ++it) gen.run_iteration();
      const bool agree = gen.commit() == want;
      (c == 0.0 ? agree_c0 : agree_c1) += agree;
    }
  }
  const double secs = clock.seconds();
  return {agree_c0 == kInstances && secs < 60.0,
          "c=0 agrees on " + std::to_string(agree_c0) + "/" + std::to_string(kInstances) + " (c=1: " +
              std::to_string(agree_c1) + "/" + std::to_string(kInstances) + "), " + fmt(secs, 2) + " s"};
}

// ---- 4: tree invariants ----

Outcome tree_invariants() {
  std::mt19937_64 rng(99);
  const auto toy = make_toy(rng);
  const auto reward = [salt = toy.salt](std::string_view t) { return hashed_value(t, salt, 0.0, 1.0); };
  GenerationConfig cfg;
  cfg.iterations = 1000;
  cfg.expansion_k = 4;
  cfg.rollout_t = 5;
  cfg.max_tokens = 12;
  cfg.rng_seed = 5;
  MctsGenerator gen(*toy.model, reward, cfg);

  // Independent per-path visit counts and reward sums, rebuilt from the trace.
  std::map<std::vector<TokenId>, std::pair<std::uint64_t, double>> expected;
  int violations = 0, iterations = 0;
  std::function<void(const SearchNode&, std::vector<TokenId>&, bool)> check =
      [&](const SearchNode& node, std::vector<TokenId>& path, bool is_root) {
        std::uint64_t n = 0;
        for (const auto& c : node.children) n += c.visits;
        if (node.visits != n + node.evaluations || (is_root && node.evaluations != 0)) ++violations;
        const auto it = expected.find(path);
        const std::uint64_t want_visits = it == expected.end() ? 0 : it->second.first;
        const double want_sum = it == expected.end() ? 0.0 : it->second.second;
        if (node.visits != want_visits || node.reward_sum != want_sum) ++violations;
        if (node.visits && node.q() != want_sum / static_cast<double>(want_visits)) ++violations;
        if (node.q() < 0.0 || node.q() > 1.0) ++violations;
        for (const auto& c : node.children) {
          path.push_back(c.token);
          check(c, path, false);
          path.pop_back();
        }
      };
  gen.set_trace_sink([&](const IterationTrace& t, const SearchNode& root) {
    ++iterations;
    std::vector<TokenId> prefix;
    for (std::size_t k = 0; k <= t.path.size(); ++k) {
      auto& e = expected[prefix];
      ++e.first;
      e.second += t.reward;
      if (k < t.path.size()) prefix.push_back(t.path[k]);
    }
    std::vector<TokenId> path;
    check(root, path, true);
  });
  const std::vector<TokenId> prompt{2};
  gen.reset(prompt);
  for (int i = 0; i < cfg.iterations; ++i) gen.run_iteration();
  return {violations == 0 && iterations == 1000,
          std::to_string(iterations) + " iterations, " + std::to_string(violations) + " violations, root visits " +
              std::to_string(gen.root().visits)};
}

// ---- 5-8: toy-scale pipeline ----

struct Pipeline {
  ts::TempDir dir{"acceptance"};
  json ingredients_report;
  json instructions_report;
  std::string error;
  double seconds = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> replays;  // manifest, artifacts

  static const std::vector<std::string>& methods() {
    static const std::vector<std::string> m{"top_p", "no_ngram", "rep_penalty", "mcts"};
    return m;
  }

  bool cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = recipemc::cli::run(args, out, err);
    if (code != 0) error = args.front() + " exited " + std::to_string(code) + ": " + err.str();
    return code == 0;
  }

  void run() {
    Clock clock;
    const auto recipes = fixtures::synthetic_recipes(5100, 2024);
    std::string train = "name\tingredients\tinstructions\n", test = train;
    for (std::size_t i = 0; i < recipes.size(); ++i) (i < 5000 ? train : test) += to_dataset_line(recipes[i]) + "\n";
    ts::write_file(dir.file("train.tsv"), train);
    ts::write_file(dir.file("test.tsv"), test);
    if (!cli({"train-lm", "--dataset", dir.file("train.tsv"), "--order", "3", "--out", dir.file("lm.json")})) return;
    if (!cli({"build-lexicon", "--dataset", dir.file("train.tsv"), "--out", dir.file("lex.txt")})) return;
    for (const std::string task : {"ingredients", "instructions"}) {
      std::vector<std::string> eval{"evaluate", "--task", task, "--truth", dir.file("test.tsv"), "--lexicon",
                                    dir.file("lex.txt"), "--model", dir.file("lm.json"), "--out",
                                    dir.file(task + "_report")};
      for (const auto& m : methods()) {
        const auto out = dir.file(task + "_" + m + ".jsonl");
        if (!cli({"generate", "--task", task, "--method", m, "--model", dir.file("lm.json"), "--dataset",
                  dir.file("test.tsv"), "--lexicon", dir.file("lex.txt"), "--seed", "1", "--out", out})) {
          return;
        }
        replays.push_back({recipemc::cli::manifest_path(out).string(), {out}});
        eval.push_back("--generations");
        eval.push_back(out);
      }
      if (!cli(eval)) return;
      const auto prefix = dir.file(task + "_report");
      replays.push_back({recipemc::cli::manifest_path(prefix).string(), {prefix + ".json", prefix + ".csv"}});
      (task == "ingredients" ? ingredients_report : instructions_report) = json::parse(ts::read_file(prefix + ".json"));
    }
    seconds = clock.seconds();
  }

  static double metric(const json& report, const std::string& method, const std::string& key) {
    for (const auto& row : report["methods"]) {
      if (row["method"] == method) return row[key].get<double>();
    }
    return std::nan("");
  }
};

Outcome table1_ordering(const Pipeline& p) {
  if (!p.error.empty()) return {false, p.error};
  const auto& r = p.ingredients_report;
  const double mc = Pipeline::metric(r, "mcts", "coherence");
  bool coherent = true;
  std::string detail = "coherence mcts " + fmt(mc);
  for (const std::string m : {"top_p", "no_ngram", "rep_penalty"}) {
    const double v = Pipeline::metric(r, m, "coherence");
    coherent = coherent && mc > v;
    detail += ", " + m + " " + fmt(v);
  }
  const double rep_mc = Pipeline::metric(r, "mcts", "repetition"), rep_tp = Pipeline::metric(r, "top_p", "repetition");
  detail += "; repetition mcts " + fmt(rep_mc) + " vs top_p " + fmt(rep_tp) + "; pipeline " + fmt(p.seconds, 1) + " s";
  return {coherent && rep_mc < rep_tp && p.seconds < 900.0, detail};
}

Outcome table2_ordering(const Pipeline& p) {
  if (!p.error.empty()) return {false, p.error};
  const double mc = Pipeline::metric(p.instructions_report, "mcts", "coherence");
  const double tp = Pipeline::metric(p.instructions_report, "top_p", "coherence");
  return {mc > tp, "coherence mcts " + fmt(mc) + " vs top_p " + fmt(tp)};
}

Outcome length_direction(const Pipeline& p) {
  if (!p.error.empty()) return {false, p.error};
  const double mc = Pipeline::metric(p.ingredients_report, "mcts", "avg_length");
  const double tp = Pipeline::metric(p.ingredients_report, "top_p", "avg_length");
  return {mc < tp, "ingredients avg length mcts " + fmt(mc, 1) + " vs top_p " + fmt(tp, 1) + " chars"};
}

Outcome replay_determinism(Pipeline& p) {
  if (!p.error.empty()) return {false, p.error};
  std::filesystem::create_directories(p.dir.path() / "replay");
  int identical = 0, total = 0;
  for (const auto& [manifest, artifacts] : p.replays) {
    std::ostringstream out, err;
    const int code = recipemc::cli::run({"replay", "--manifest", manifest, "--output-dir",
                                         (p.dir.path() / "replay").string()},
                                        out, err);
    for (const auto& a : artifacts) {
      ++total;
      const auto copy = p.dir.path() / "replay" / std::filesystem::path(a).filename();
      if (code == 0 && ts::read_file(a) == ts::read_file(copy) && !ts::read_file(a).empty()) ++identical;
    }
  }
  return {identical == total && total > 0,
          std::to_string(identical) + "/" + std::to_string(total) + " artifacts byte-identical after replay"};
}

// ---- 9: remote protocol ----

Outcome remote_protocol() {
  std::mt19937_64 rng(31);
  std::string body;
  int status = 200;
  ts::StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content(body, "application/json");
  });
  const RemoteEndpoint endpoint{server.url(), std::chrono::milliseconds(2000)};
  const std::vector<std::string> ctx{"<|startofname|>", "soup"};
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<double> probs;
    double left = 0.999;
    for (int j = 0; j < k; ++j) {
      const double p = left * (0.1 + 0.5 * static_cast<double>(rng() % 1000) / 1000.0);
      probs.push_back(p);
      left -= p;
    }
    std::sort(probs.rbegin(), probs.rend());
    std::vector<std::string> tokens;
    for (int j = 0; j < k; ++j) tokens.push_back("t" + std::to_string(j));
    body = json({{"tokens", tokens}, {"probs", probs}}).dump();
    try {
      const auto p = renormalized(query_remote(endpoint, ctx, k));
      double sum = 0;
      for (double v : p) sum += v;
      if (std::abs(sum - 1.0) > 1e-9) ++bad;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  const std::vector<std::pair<std::string, RemoteError::Kind>> malformed{
      {"not json", RemoteError::Kind::kMalformedResponse},
      {R"({"tokens":["a"]})", RemoteError::Kind::kMalformedResponse},
      {R"({"tokens":["a","b"],"probs":[0.5]})", RemoteError::Kind::kMalformedResponse},
      {R"({"tokens":["a","b"],"probs":[0.9,0.8]})", RemoteError::Kind::kInvariantViolation},
      {R"({"tokens":["a","b"],"probs":[0.2,0.5]})", RemoteError::Kind::kInvariantViolation},
      {R"({"tokens":[],"probs":[]})", RemoteError::Kind::kInvariantViolation},
  };
  int typed = 0;
  for (const auto& [text, kind] : malformed) {
    body = text;
    try {
      query_remote(endpoint, ctx, 5);
    } catch (const RemoteError& e) {
      typed += e.kind() == kind;
    } catch (...) {
    }
  }
  status = 500;
  body = "{}";
  try {
    query_remote(endpoint, ctx, 5);
  } catch (const RemoteError& e) {
    typed += e.kind() == RemoteError::Kind::kHttpStatus;
  } catch (...) {
  }
  const int want_typed = static_cast<int>(malformed.size()) + 1;
  return {bad == 0 && typed == want_typed, "50 renormalizations, " + std::to_string(bad) + " off; " +
                                               std::to_string(typed) + "/" + std::to_string(want_typed) +
                                               " malformed responses raised the expected error kind"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& title, const Outcome& o) {
    std::printf("criterion %d %s: %s (%s)\n", id, title.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  report(1, "metric oracles", metric_oracles());
  report(2, "reward examples", reward_examples());
  report(3, "mcts vs brute force", mcts_brute_force());
  report(4, "tree invariants", tree_invariants());
  Pipeline pipeline;
  pipeline.run();
  report(5, "ingredients ordering", table1_ordering(pipeline));
  report(6, "instructions ordering", table2_ordering(pipeline));
  report(7, "output length", length_direction(pipeline));
  report(8, "replay determinism", replay_determinism(pipeline));
  report(9, "remote protocol", remote_protocol());
  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
