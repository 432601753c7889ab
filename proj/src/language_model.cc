#include "recipemc/language_model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "recipemc/recipe.h"

namespace recipemc {
namespace {

bool by_prob_then_id(const TokenProb& a, const TokenProb& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  return a.token < b.token;
}

bool is_tag(std::string_view token) {
  return std::find(std::begin(kRecipeTags), std::end(kRecipeTags), token) != std::end(kRecipeTags);
}

}  // namespace

Vocabulary::Vocabulary() {
  for (auto tag : kRecipeTags) add(tag);
  unknown_id_ = add(kUnknownToken);
}

TokenId Vocabulary::add(std::string_view token) {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id_or_unknown(std::string_view token) const {
  return find(token).value_or(unknown_id_);
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ModelError("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '<' && i + 1 < text.size() && text[i + 1] == '|') {
      bool matched = false;
      for (auto tag : kRecipeTags) {
        if (text.compare(i, tag.size(), tag) == 0) {
          flush();
          tokens.emplace_back(tag);
          i += tag.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (c == ';') {
      flush();
      tokens.emplace_back(";");
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(c);
    }
    ++i;
  }
  flush();
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  bool prev_tag = true;
  for (const auto& token : tokens) {
    const bool tag = is_tag(token);
    if (!out.empty() && !prev_tag && !tag && token != ";") out.push_back(' ');
    out += token;
    prev_tag = tag;
  }
  return out;
}

TokenDistribution::TokenDistribution(std::vector<TokenProb> support) : support_(std::move(support)) {
  if (support_.empty()) throw DistributionError("empty distribution");
  std::unordered_set<TokenId> seen;
  double sum = 0.0;
  for (const auto& tp : support_) {
    if (!(tp.prob > 0.0) || !std::isfinite(tp.prob)) {
      throw DistributionError("non-positive probability " + std::to_string(tp.prob) + " for token " +
                              std::to_string(tp.token));
    }
    if (!seen.insert(tp.token).second) {
      throw DistributionError("duplicate token " + std::to_string(tp.token));
    }
    sum += tp.prob;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DistributionError("probabilities sum to " + std::to_string(sum));
  }
  std::sort(support_.begin(), support_.end(), by_prob_then_id);
}

TokenDistribution TokenDistribution::normalized(std::vector<TokenProb> weights) {
  std::erase_if(weights, [](const TokenProb& tp) { return !(tp.prob > 0.0); });
  double sum = 0.0;
  for (const auto& tp : weights) sum += tp.prob;
  if (weights.empty() || !std::isfinite(sum)) {
    throw DistributionError("cannot normalize an empty or non-finite weight vector");
  }
  for (auto& tp : weights) tp.prob /= sum;
  return TokenDistribution(std::move(weights));
}

double TokenDistribution::probability(TokenId token) const {
  for (const auto& tp : support_) {
    if (tp.token == token) return tp.prob;
  }
  return 0.0;
}

double TokenDistribution::total() const {
  double sum = 0.0;
  for (const auto& tp : support_) sum += tp.prob;
  return sum;
}

std::vector<TokenId> VocabularyModel::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& t : split_tokens(text)) ids.push_back(vocabulary_.id_or_unknown(t));
  return ids;
}

std::string VocabularyModel::decode(std::span<const TokenId> tokens) const {
  std::vector<std::string> strings;
  strings.reserve(tokens.size());
  for (TokenId id : tokens) strings.push_back(vocabulary_.token(id));
  return join_tokens(strings);
}

TokenDistribution UniformModel::next_token_distribution(std::span<const TokenId>) const {
  const auto v = vocabulary().size();
  std::vector<TokenProb> support(v);
  for (std::size_t i = 0; i < v; ++i) support[i] = {static_cast<TokenId>(i), 1.0 / static_cast<double>(v)};
  return TokenDistribution(std::move(support));
}

std::vector<double> sequence_log_probs(const LanguageModel& model, std::span<const TokenId> tokens,
                                       std::size_t prompt_len) {
  if (prompt_len >= tokens.size()) {
    throw std::invalid_argument("prompt length must be smaller than the sequence length");
  }
  std::vector<double> out;
  out.reserve(tokens.size() - prompt_len);
  for (std::size_t i = prompt_len; i < tokens.size(); ++i) {
    const double p = model.token_probability(tokens.first(i), tokens[i]);
    if (!(p > 0.0)) {
      throw ModelError("token at position " + std::to_string(i) + " has zero probability");
    }
    out.push_back(std::log(p));
  }
  return out;
}

std::size_t DistributionCache::KeyHash::operator()(const std::vector<TokenId>& key) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (TokenId t : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
    h *= 1099511628211ull;
  }
  return h;
}

DistributionCache::DistributionCache(const LanguageModel& model, std::size_t max_entries)
    : model_(model), window_(model.context_window()), max_entries_(std::max<std::size_t>(1, max_entries)) {}

const TokenDistribution& DistributionCache::get(std::span<const TokenId> context) {
  auto effective = context;
  if (window_ && effective.size() > *window_) effective = effective.last(*window_);
  key_.assign(effective.begin(), effective.end());
  if (auto it = entries_.find(key_); it != entries_.end()) return *it->second;
  if (entries_.size() >= max_entries_) entries_.clear();
  auto dist = std::make_unique<TokenDistribution>(model_.next_token_distribution(context));
  auto [it, inserted] = entries_.emplace(key_, std::move(dist));
  return *it->second;
}

}  // namespace recipemc
