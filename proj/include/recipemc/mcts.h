#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "recipemc/decoding.h"
#include "recipemc/language_model.h"

namespace recipemc {

// Scalar reward of a decoded text (prompt plus generation). Must be total.
using RewardFunction = std::function<double(std::string_view decoded_text)>;

// One state of the search: the token that leads to it and its statistics.
struct SearchNode {
  static constexpr TokenId kNoToken = -1;

  TokenId token = kNoToken;
  double prior = 0.0;              // renormalized top-k probability
  std::uint64_t visits = 0;        // n_i: backpropagations through this node
  double reward_sum = 0.0;
  std::uint64_t evaluations = 0;   // rollouts that started at this node
  bool expanded = false;
  bool terminal = false;           // stop tag or token budget reached
  std::vector<SearchNode> children;

  // Mean backpropagated reward; 0 before the first visit.
  double q() const noexcept { return visits ? reward_sum / static_cast<double>(visits) : 0.0; }
  // N in the PUCB formula.
  std::uint64_t child_visits() const noexcept;
};

// Q + c * prior * sqrt(N) / (n + 1).
double pucb(double q, double c, double prior, std::uint64_t parent_visits, std::uint64_t visits);

// Index of the child maximizing PUCB; ties go to the higher prior, then the
// lower token id.
std::size_t select_child(const SearchNode& parent, double exploration_c);

// Index of the visited child with the highest Q, same tie-break. Throws
// std::logic_error if no child was visited.
std::size_t best_child(const SearchNode& parent);

struct IterationTrace {
  std::size_t step = 0;          // tokens committed so far
  int iteration = 0;
  std::vector<TokenId> path;     // tokens from the root to the evaluated node
  std::size_t rollout_tokens = 0;
  double reward = 0.0;
};

class MctsGenerator {
 public:
  using TraceSink = std::function<void(const IterationTrace&, const SearchNode& root)>;

  MctsGenerator(const LanguageModel& model, RewardFunction reward, GenerationConfig config);

  // Called after every completed iteration with the current root.
  void set_trace_sink(TraceSink sink) { trace_ = std::move(sink); }

  GenerationResult generate(std::span<const TokenId> prompt);

  // Step-level interface used by generate().
  void reset(std::span<const TokenId> prompt);
  void run_iteration();
  // Commits the best root child and makes it the new root.
  TokenId commit();
  bool finished() const noexcept { return finished_; }

  const SearchNode& root() const noexcept { return root_; }
  const std::vector<TokenId>& committed() const noexcept { return committed_; }

 private:
  void expand(SearchNode& node, std::size_t depth);
  double evaluate(std::size_t rollout_budget, std::size_t& rollout_tokens);
  bool at_budget(std::size_t depth) const;

  const LanguageModel& model_;
  RewardFunction reward_;
  GenerationConfig config_;
  TokenId stop_;
  DistributionCache cache_;
  Rng rng_;
  TraceSink trace_;

  std::vector<TokenId> prompt_;
  std::vector<TokenId> committed_;
  std::vector<TokenId> scratch_;  // prompt + committed + path + rollout
  SearchNode root_;
  int iteration_ = 0;
  bool finished_ = false;
};

GenerationResult mcts_generate(const LanguageModel& model, std::span<const TokenId> prompt,
                               const RewardFunction& reward, const GenerationConfig& config);

}  // namespace recipemc
