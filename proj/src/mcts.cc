#include "recipemc/mcts.h"

#include <cmath>
#include <stdexcept>

namespace recipemc {
namespace {

// True if candidate (score, prior, token) ranks above the incumbent.
bool ranks_above(double score, const SearchNode& node, double best_score, const SearchNode& best) {
  if (score != best_score) return score > best_score;
  if (node.prior != best.prior) return node.prior > best.prior;
  return node.token < best.token;
}

// Top-p draw without materializing the filtered distribution.
TokenId sample_nucleus(const TokenDistribution& dist, double p, Rng& rng) {
  const auto support = dist.support();
  std::size_t cut = 0;
  double mass = 0.0;
  while (cut < support.size()) {
    mass += support[cut].prob;
    ++cut;
    if (mass >= p - 1e-12) break;
  }
  const double u = rng.uniform() * mass;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < cut; ++i) {
    cumulative += support[i].prob;
    if (u < cumulative) return support[i].token;
  }
  return support[cut - 1].token;
}

}  // namespace

std::uint64_t SearchNode::child_visits() const noexcept {
  std::uint64_t n = 0;
  for (const auto& c : children) n += c.visits;
  return n;
}

double pucb(double q, double c, double prior, std::uint64_t parent_visits, std::uint64_t visits) {
  return q + c * prior * std::sqrt(static_cast<double>(parent_visits)) / (static_cast<double>(visits) + 1.0);
}

std::size_t select_child(const SearchNode& parent, double exploration_c) {
  if (parent.children.empty()) throw std::logic_error("select_child on a node without children");
  const auto total = parent.child_visits();
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < parent.children.size(); ++i) {
    const auto& child = parent.children[i];
    const double score = pucb(child.q(), exploration_c, child.prior, total, child.visits);
    if (i == 0 || ranks_above(score, child, best_score, parent.children[best])) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::size_t best_child(const SearchNode& parent) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < parent.children.size(); ++i) {
    const auto& child = parent.children[i];
    if (child.visits == 0) continue;
    if (!best || ranks_above(child.q(), child, parent.children[*best].q(), parent.children[*best])) best = i;
  }
  if (!best) throw std::logic_error("no visited child to commit");
  return *best;
}

MctsGenerator::MctsGenerator(const LanguageModel& model, RewardFunction reward, GenerationConfig config)
    : model_(model),
      reward_(std::move(reward)),
      config_(std::move(config)),
      stop_(-1),
      cache_(model, 4096),
      rng_(config_.rng_seed) {
  config_.validate();
  if (!reward_) throw std::invalid_argument("MCTS needs a reward function");
  auto stop = model_.token_id(config_.stop_tag);
  if (!stop) throw ConfigError("stop tag \"" + config_.stop_tag + "\" is not in the model vocabulary");
  stop_ = *stop;
}

void MctsGenerator::reset(std::span<const TokenId> prompt) {
  if (prompt.empty()) throw std::invalid_argument("prompt must not be empty");
  prompt_.assign(prompt.begin(), prompt.end());
  committed_.clear();
  root_ = SearchNode{};
  rng_ = Rng(config_.rng_seed);
  iteration_ = 0;
  finished_ = false;
}

bool MctsGenerator::at_budget(std::size_t depth) const {
  return committed_.size() + depth >= static_cast<std::size_t>(config_.max_tokens);
}

void MctsGenerator::expand(SearchNode& node, std::size_t depth) {
  const TokenDistribution& dist = cache_.get(scratch_);
  const auto support = dist.support();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config_.expansion_k), support.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) mass += support[i].prob;
  node.children.clear();
  node.children.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    SearchNode child;
    child.token = support[i].token;
    child.prior = support[i].prob / mass;
    child.terminal = child.token == stop_ || at_budget(depth + 1);
    node.children.push_back(std::move(child));
  }
  node.expanded = true;
}

double MctsGenerator::evaluate(std::size_t rollout_budget, std::size_t& rollout_tokens) {
  rollout_tokens = 0;
  while (rollout_tokens < rollout_budget) {
    const TokenId next = sample_nucleus(cache_.get(scratch_), config_.nucleus_p, rng_);
    scratch_.push_back(next);
    ++rollout_tokens;
    if (next == stop_) break;
  }
  return reward_(model_.decode(scratch_));
}

void MctsGenerator::run_iteration() {
  if (finished_) throw std::logic_error("generation already finished");
  scratch_ = prompt_;
  scratch_.insert(scratch_.end(), committed_.begin(), committed_.end());

  IterationTrace trace;
  trace.step = committed_.size();
  trace.iteration = iteration_++;

  std::vector<SearchNode*> path{&root_};
  SearchNode* node = &root_;
  std::size_t depth = 0;
  auto descend = [&](std::size_t index) {
    node = &node->children[index];
    path.push_back(node);
    scratch_.push_back(node->token);
    trace.path.push_back(node->token);
    ++depth;
  };

  // Selection.
  while (node->expanded && !node->terminal) descend(select_child(*node, config_.exploration_c));

  // Expansion, then pick the new child to simulate from.
  if (!node->terminal) {
    expand(*node, depth);
    descend(select_child(*node, config_.exploration_c));
  }

  // Simulation.
  std::size_t budget = 0;
  if (!node->terminal) {
    const auto used = committed_.size() + depth;
    const auto cap = static_cast<std::size_t>(config_.max_tokens);
    budget = std::min(static_cast<std::size_t>(config_.rollout_t), cap > used ? cap - used : 0);
  }
  const double reward = evaluate(budget, trace.rollout_tokens);

  // Backpropagation.
  node->evaluations += 1;
  for (SearchNode* n : path) {
    n->visits += 1;
    n->reward_sum += reward;
  }

  trace.reward = reward;
  if (trace_) trace_(trace, root_);
}

TokenId MctsGenerator::commit() {
  const std::size_t index = best_child(root_);
  SearchNode next = std::move(root_.children[index]);
  root_ = std::move(next);
  committed_.push_back(root_.token);
  if (root_.token == stop_ || committed_.size() >= static_cast<std::size_t>(config_.max_tokens)) {
    finished_ = true;
  }
  return root_.token;
}

GenerationResult MctsGenerator::generate(std::span<const TokenId> prompt) {
  reset(prompt);
  while (!finished_) {
    for (int i = 0; i < config_.iterations; ++i) run_iteration();
    commit();
  }
  GenerationResult result;
  result.tokens = committed_;
  result.stopped = !committed_.empty() && committed_.back() == stop_;
  return result;
}

GenerationResult mcts_generate(const LanguageModel& model, std::span<const TokenId> prompt,
                               const RewardFunction& reward, const GenerationConfig& config) {
  MctsGenerator generator(model, reward, config);
  return generator.generate(prompt);
}

}  // namespace recipemc
