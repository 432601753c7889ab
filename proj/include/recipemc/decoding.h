#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recipemc/language_model.h"
#include "recipemc/recipe.h"

namespace recipemc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GenerationConfig {
  int iterations = 20;         // MCTS iterations per emitted token
  double exploration_c = 1.0;  // PUCB exploration weight
  int expansion_k = 50;        // children added per expansion
  double nucleus_p = 0.9;      // top-p mass for sampling and rollouts
  int rollout_t = 30;          // rollout length in tokens
  int max_tokens = 256;        // cap on generated tokens
  std::uint64_t rng_seed = 0;
  std::string stop_tag = std::string(kEndOfIngr);
  double repetition_theta = 1.2;  // repetition-penalty baseline
  int no_repeat_ngram = 4;        // no-n-gram-repeat baseline

  // Throws ConfigError when a field is out of range.
  void validate() const;

  nlohmann::json to_json() const;
  // Missing keys keep their current values.
  void merge_json(const nlohmann::json& config);
};

// Deterministic random source. Doubles are built from the top 53 bits of
// mt19937_64 so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Independent per-sample seed from a master seed (splitmix64 of both).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Smallest probability-sorted prefix whose mass reaches p, renormalized.
TokenDistribution top_p_filter(const TokenDistribution& dist, double p);

struct FilterResult {
  TokenDistribution dist;
  bool bypassed = false;  // every token was banned; the input was returned
};

// Bans tokens that would complete an n-gram already present in `history`.
FilterResult apply_no_ngram_repeat(const TokenDistribution& dist, std::span<const TokenId> history, int n);

// Penalizes the log-probability of tokens seen in `history`: negative scores
// are multiplied by theta, positive ones divided, then renormalized.
TokenDistribution apply_repetition_penalty(const TokenDistribution& dist, std::span<const TokenId> history,
                                           double theta);

// Inverse-CDF draw over the sorted support.
TokenId sample_token(const TokenDistribution& dist, Rng& rng);

enum class SamplingMethod { kTopP, kNoNgramRepeat, kRepetitionPenalty, kMcts };

std::string_view method_name(SamplingMethod method);
// Accepts top_p, no_ngram, rep_penalty, mcts.
SamplingMethod parse_method(std::string_view name);

struct GenerationResult {
  std::vector<TokenId> tokens;  // generated tokens, including the stop tag if emitted
  bool stopped = false;         // stop tag reached before max_tokens
  std::size_t filter_bypasses = 0;
};

// Baseline samplers: top-p alone, or top-p after the no-n-gram-repeat filter
// or the repetition penalty. Filters see the prompt and the generation.
GenerationResult sample_sequence(const LanguageModel& model, std::span<const TokenId> prompt,
                                 SamplingMethod method, const GenerationConfig& config);

}  // namespace recipemc
