#include "recipemc/decoding.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace recipemc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

TokenId resolve_stop(const LanguageModel& model, const std::string& stop_tag) {
  auto id = model.token_id(stop_tag);
  if (!id) throw ConfigError("stop tag \"" + stop_tag + "\" is not in the model vocabulary");
  return *id;
}

}  // namespace

void GenerationConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (expansion_k < 1) throw ConfigError("expansion_k must be >= 1");
  if (rollout_t < 0) throw ConfigError("rollout_t must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw ConfigError("nucleus_p must lie in (0, 1]");
  if (!(exploration_c >= 0.0) || !std::isfinite(exploration_c)) throw ConfigError("exploration_c must be >= 0");
  if (!(repetition_theta > 1.0)) throw ConfigError("repetition_theta must be > 1");
  if (no_repeat_ngram < 2) throw ConfigError("no_repeat_ngram must be >= 2");
  if (stop_tag.empty()) throw ConfigError("stop_tag must be set");
}

nlohmann::json GenerationConfig::to_json() const {
  return {{"iterations", iterations},   {"exploration_c", exploration_c},
          {"expansion_k", expansion_k}, {"nucleus_p", nucleus_p},
          {"rollout_t", rollout_t},     {"max_tokens", max_tokens},
          {"rng_seed", rng_seed},       {"stop_tag", stop_tag},
          {"repetition_theta", repetition_theta}, {"no_repeat_ngram", no_repeat_ngram}};
}

void GenerationConfig::merge_json(const nlohmann::json& config) {
  try {
    iterations = config.value("iterations", iterations);
    exploration_c = config.value("exploration_c", exploration_c);
    expansion_k = config.value("expansion_k", expansion_k);
    nucleus_p = config.value("nucleus_p", nucleus_p);
    rollout_t = config.value("rollout_t", rollout_t);
    max_tokens = config.value("max_tokens", max_tokens);
    rng_seed = config.value("rng_seed", rng_seed);
    stop_tag = config.value("stop_tag", stop_tag);
    repetition_theta = config.value("repetition_theta", repetition_theta);
    no_repeat_ngram = config.value("no_repeat_ngram", no_repeat_ngram);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid generation config: ") + e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

TokenDistribution top_p_filter(const TokenDistribution& dist, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("nucleus p must lie in (0, 1]");
  std::vector<TokenProb> kept;
  double mass = 0.0;
  for (const auto& tp : dist.support()) {
    kept.push_back(tp);
    mass += tp.prob;
    if (mass >= p - 1e-12) break;
  }
  return TokenDistribution::normalized(std::move(kept));
}

FilterResult apply_no_ngram_repeat(const TokenDistribution& dist, std::span<const TokenId> history, int n) {
  if (n < 2) throw std::invalid_argument("no-repeat n-gram size must be >= 2");
  const auto prefix_len = static_cast<std::size_t>(n - 1);
  if (history.size() < prefix_len) return {dist, false};

  const auto tail = history.last(prefix_len);
  std::unordered_set<TokenId> banned;
  for (std::size_t j = 0; j + prefix_len < history.size(); ++j) {
    if (std::equal(tail.begin(), tail.end(), history.begin() + static_cast<std::ptrdiff_t>(j))) {
      banned.insert(history[j + prefix_len]);
    }
  }
  if (banned.empty()) return {dist, false};

  std::vector<TokenProb> kept;
  for (const auto& tp : dist.support()) {
    if (!banned.count(tp.token)) kept.push_back(tp);
  }
  if (kept.empty()) return {dist, true};
  return {TokenDistribution::normalized(std::move(kept)), false};
}

TokenDistribution apply_repetition_penalty(const TokenDistribution& dist, std::span<const TokenId> history,
                                           double theta) {
  if (!(theta > 1.0)) throw std::invalid_argument("repetition penalty theta must be > 1");
  if (history.empty()) return dist;
  const std::unordered_set<TokenId> seen(history.begin(), history.end());
  std::vector<TokenProb> weights;
  weights.reserve(dist.size());
  for (const auto& tp : dist.support()) {
    double score = std::log(tp.prob);
    if (seen.count(tp.token)) score = score < 0.0 ? score * theta : score / theta;
    weights.push_back({tp.token, std::exp(score)});
  }
  return TokenDistribution::normalized(std::move(weights));
}

TokenId sample_token(const TokenDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  const auto support = dist.support();
  for (const auto& tp : support) {
    cumulative += tp.prob;
    if (u < cumulative) return tp.token;
  }
  return support.back().token;
}

std::string_view method_name(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kTopP: return "top_p";
    case SamplingMethod::kNoNgramRepeat: return "no_ngram";
    case SamplingMethod::kRepetitionPenalty: return "rep_penalty";
    case SamplingMethod::kMcts: return "mcts";
  }
  return "unknown";
}

SamplingMethod parse_method(std::string_view name) {
  for (auto m : {SamplingMethod::kTopP, SamplingMethod::kNoNgramRepeat, SamplingMethod::kRepetitionPenalty,
                 SamplingMethod::kMcts}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method \"" + std::string(name) +
                              "\" (expected top_p, no_ngram, rep_penalty or mcts)");
}

GenerationResult sample_sequence(const LanguageModel& model, std::span<const TokenId> prompt,
                                 SamplingMethod method, const GenerationConfig& config) {
  config.validate();
  if (prompt.empty()) throw std::invalid_argument("prompt must not be empty");
  if (method == SamplingMethod::kMcts) {
    throw std::invalid_argument("sample_sequence implements the baselines; use mcts_generate for MCTS");
  }
  const TokenId stop = resolve_stop(model, config.stop_tag);

  DistributionCache cache(model);
  Rng rng(config.rng_seed);
  std::vector<TokenId> context(prompt.begin(), prompt.end());
  GenerationResult result;
  for (int i = 0; i < config.max_tokens; ++i) {
    const TokenDistribution& raw = cache.get(context);
    TokenId next;
    switch (method) {
      case SamplingMethod::kNoNgramRepeat: {
        auto filtered = apply_no_ngram_repeat(raw, context, config.no_repeat_ngram);
        if (filtered.bypassed) ++result.filter_bypasses;
        next = sample_token(top_p_filter(filtered.dist, config.nucleus_p), rng);
        break;
      }
      case SamplingMethod::kRepetitionPenalty:
        next = sample_token(
            top_p_filter(apply_repetition_penalty(raw, context, config.repetition_theta), config.nucleus_p), rng);
        break;
      default:
        next = sample_token(top_p_filter(raw, config.nucleus_p), rng);
        break;
    }
    context.push_back(next);
    result.tokens.push_back(next);
    if (next == stop) {
      result.stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace recipemc
