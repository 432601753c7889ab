#pragma once

#include <chrono>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "recipemc/language_model.h"

namespace recipemc {

// Failure talking to a next-token server. Decoders propagate these; they are
// never replaced by a fallback distribution.
class RemoteError : public ModelError {
 public:
  enum class Kind { kTransport, kHttpStatus, kMalformedResponse, kInvariantViolation };

  RemoteError(Kind kind, const std::string& what) : ModelError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string_view remote_error_kind_name(RemoteError::Kind kind);

struct RemoteEndpoint {
  std::string url;  // e.g. "http://127.0.0.1:8080"
  std::chrono::milliseconds timeout{10000};
};

// Validated top-k candidates as returned by the server, probabilities
// descending and not renormalized.
struct RemoteCandidates {
  std::vector<std::string> tokens;
  std::vector<double> probs;
};

inline constexpr std::string_view kNextTokenPath = "/v1/next_token";

// POST {"context": [...], "top_k": K} to <url>/v1/next_token.
RemoteCandidates query_remote(const RemoteEndpoint& endpoint, std::span<const std::string> context,
                              int top_k);

// Checks a response body against the protocol. Throws RemoteError.
RemoteCandidates parse_remote_response(std::string_view body, int top_k);

// Renormalizes candidate probabilities over the returned top-k.
std::vector<double> renormalized(const RemoteCandidates& candidates);

// LanguageModel backed by a remote server. Prompts are split with the
// built-in whitespace tokenizer; token strings returned by the server are
// interned into a vocabulary that grows as new strings appear.
class RemoteModel : public LanguageModel {
 public:
  RemoteModel(RemoteEndpoint endpoint, int top_k);

  TokenDistribution next_token_distribution(std::span<const TokenId> context) const override;
  std::vector<TokenId> encode(std::string_view text) const override;
  std::string decode(std::span<const TokenId> tokens) const override;
  std::optional<TokenId> token_id(std::string_view token) const override;

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  TokenId intern(std::string_view token) const;
  std::string token_string(TokenId id) const;

  RemoteEndpoint endpoint_;
  int top_k_;
  mutable std::mutex mutex_;
  mutable Vocabulary vocabulary_;
};

}  // namespace recipemc
