#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recipemc/language_model.h"

namespace recipemc {

// Interpolated backoff n-gram model over whitespace tokens.
//
// p(w | ctx) = (1 - floor) * sum_k lambda'_k * c_k(ctx_k, w) / c_k(ctx_k) + floor / V
//
// where k runs over the orders whose (k-1)-token context was observed in
// training, and lambda'_k are the configured weights renormalized over those
// orders. The uniform floor keeps every vocabulary token in the support.
class NGramModel : public VocabularyModel {
 public:
  static constexpr double kDefaultFloor = 1e-6;
  static constexpr std::string_view kFileMagic = "recipemc-ngram";
  static constexpr int kFileVersion = 1;

  // Default interpolation weights, highest order first.
  static std::vector<double> default_weights(int order);

  // Trains on whitespace-tokenized texts. `weights` are ordered highest order
  // first and must be positive and sum to 1. Throws ModelError on an empty
  // corpus or invalid parameters.
  static NGramModel train(const std::vector<std::string>& corpus, int order,
                          std::vector<double> weights, double floor = kDefaultFloor);

  static NGramModel load(const std::filesystem::path& path);
  static NGramModel from_text(std::string_view text);
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  TokenDistribution next_token_distribution(std::span<const TokenId> context) const override;
  double token_probability(std::span<const TokenId> context, TokenId token) const override;
  std::optional<std::size_t> context_window() const override {
    return static_cast<std::size_t>(order_ - 1);
  }

  int order() const noexcept { return order_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double floor() const noexcept { return floor_; }

 private:
  struct Continuations {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> counts;  // sorted by token
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  using Table = std::unordered_map<std::vector<TokenId>, Continuations, KeyHash>;

  NGramModel(Vocabulary vocabulary, int order, std::vector<double> weights, double floor,
             std::vector<Table> tables);

  // Per active order: (effective weight, continuations), lowest order first.
  struct ActiveOrder {
    double weight;
    const Continuations* continuations;
  };
  std::vector<ActiveOrder> active_orders(std::span<const TokenId> context) const;

  int order_;
  std::vector<double> weights_;  // highest order first
  double floor_;
  std::vector<Table> tables_;  // tables_[k-1] holds (k-1)-token contexts
};

}  // namespace recipemc
