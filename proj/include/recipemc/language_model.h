#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recipemc {

using TokenId = std::int32_t;

inline constexpr std::string_view kUnknownToken = "<unk>";

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DistributionError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Dense token <-> id table. Ids 0..5 are the recipe tags, id 6 is <unk>.
class Vocabulary {
 public:
  Vocabulary();

  TokenId add(std::string_view token);
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id_or_unknown(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId unknown_id() const noexcept { return unknown_id_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId unknown_id_ = 0;
};

// Whitespace tokenization with the six tags and ';' as standalone tokens.
std::vector<std::string> split_tokens(std::string_view text);
// Inverse of split_tokens up to whitespace: tags are glued to their
// neighbours and ';' to the preceding token.
std::string join_tokens(std::span<const std::string> tokens);

struct TokenProb {
  TokenId token;
  double prob;
  friend bool operator==(const TokenProb&, const TokenProb&) = default;
};

// Probability mass over next tokens. Support is kept sorted by descending
// probability, ties by ascending token id.
class TokenDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Throws DistributionError unless every probability is positive and finite,
  // ids are unique and the total is within kSumTolerance of 1.
  explicit TokenDistribution(std::vector<TokenProb> support);

  // Drops non-positive weights and rescales the rest to sum to 1.
  static TokenDistribution normalized(std::vector<TokenProb> weights);

  std::span<const TokenProb> support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }
  double probability(TokenId token) const;
  double total() const;

 private:
  std::vector<TokenProb> support_;
};

// Next-token probability contract consumed by every decoder.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual TokenDistribution next_token_distribution(std::span<const TokenId> context) const = 0;
  virtual double token_probability(std::span<const TokenId> context, TokenId token) const {
    return next_token_distribution(context).probability(token);
  }

  virtual std::vector<TokenId> encode(std::string_view text) const = 0;
  virtual std::string decode(std::span<const TokenId> tokens) const = 0;
  virtual std::optional<TokenId> token_id(std::string_view token) const = 0;

  // Number of trailing context tokens the distribution depends on, if bounded.
  virtual std::optional<std::size_t> context_window() const { return std::nullopt; }
};

// Shared encode/decode over a fixed vocabulary.
class VocabularyModel : public LanguageModel {
 public:
  explicit VocabularyModel(Vocabulary vocabulary) : vocabulary_(std::move(vocabulary)) {}

  std::vector<TokenId> encode(std::string_view text) const override;
  std::string decode(std::span<const TokenId> tokens) const override;
  std::optional<TokenId> token_id(std::string_view token) const override {
    return vocabulary_.find(token);
  }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }

 private:
  Vocabulary vocabulary_;
};

// Equal probability for every vocabulary token, regardless of context.
class UniformModel : public VocabularyModel {
 public:
  explicit UniformModel(Vocabulary vocabulary) : VocabularyModel(std::move(vocabulary)) {}
  TokenDistribution next_token_distribution(std::span<const TokenId> context) const override;
  std::optional<std::size_t> context_window() const override { return 0; }
};

// log p(tokens[i] | tokens[0..i)) for every i >= prompt_len.
std::vector<double> sequence_log_probs(const LanguageModel& model, std::span<const TokenId> tokens,
                                       std::size_t prompt_len);

// Memoizes distributions by the context suffix that determines them. A
// returned reference stays valid until the next call to get(). Not
// thread-safe; use one cache per generation job.
class DistributionCache {
 public:
  explicit DistributionCache(const LanguageModel& model, std::size_t max_entries = 1 << 14);

  const TokenDistribution& get(std::span<const TokenId> context);
  const LanguageModel& model() const noexcept { return model_; }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };

  const LanguageModel& model_;
  std::optional<std::size_t> window_;
  std::size_t max_entries_;
  std::unordered_map<std::vector<TokenId>, std::unique_ptr<TokenDistribution>, KeyHash> entries_;
  std::vector<TokenId> key_;
};

}  // namespace recipemc
