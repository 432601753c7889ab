#include "recipemc/remote_model.h"

#include <cmath>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"

namespace recipemc {
namespace {

using Kind = RemoteError::Kind;
using nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path before /v1/next_token, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  if (url.rfind("http://", 0) != 0) {
    throw RemoteError(Kind::kTransport, "unsupported endpoint \"" + url + "\" (expected http://host:port)");
  }
  auto slash = url.find('/', 7);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

std::string_view remote_error_kind_name(RemoteError::Kind kind) {
  switch (kind) {
    case Kind::kTransport: return "transport";
    case Kind::kHttpStatus: return "http-status";
    case Kind::kMalformedResponse: return "malformed-response";
    case Kind::kInvariantViolation: return "invariant-violation";
  }
  return "unknown";
}

RemoteCandidates parse_remote_response(std::string_view body, int top_k) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw RemoteError(Kind::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tokens") || !doc.contains("probs") ||
      !doc["tokens"].is_array() || !doc["probs"].is_array()) {
    throw RemoteError(Kind::kMalformedResponse, "response must be an object with \"tokens\" and \"probs\" arrays");
  }
  RemoteCandidates out;
  for (const auto& t : doc["tokens"]) {
    if (!t.is_string()) throw RemoteError(Kind::kMalformedResponse, "non-string token in response");
    out.tokens.push_back(t.get<std::string>());
  }
  for (const auto& p : doc["probs"]) {
    if (!p.is_number()) throw RemoteError(Kind::kMalformedResponse, "non-numeric probability in response");
    out.probs.push_back(p.get<double>());
  }
  if (out.tokens.size() != out.probs.size()) {
    throw RemoteError(Kind::kMalformedResponse, "tokens and probs differ in length");
  }
  if (out.tokens.empty()) throw RemoteError(Kind::kInvariantViolation, "response has no candidates");
  if (out.tokens.size() > static_cast<std::size_t>(top_k)) {
    throw RemoteError(Kind::kInvariantViolation, "response has " + std::to_string(out.tokens.size()) +
                                                     " candidates, more than top_k=" + std::to_string(top_k));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    const double p = out.probs[i];
    if (!std::isfinite(p) || p <= 0.0 || p > 1.0) {
      throw RemoteError(Kind::kInvariantViolation, "probability out of (0, 1]: " + std::to_string(p));
    }
    if (i > 0 && p > out.probs[i - 1]) {
      throw RemoteError(Kind::kInvariantViolation, "probabilities are not in descending order");
    }
    sum += p;
  }
  if (sum > 1.0 + TokenDistribution::kSumTolerance) {
    throw RemoteError(Kind::kInvariantViolation, "probabilities sum to " + std::to_string(sum));
  }
  std::unordered_set<std::string> seen;
  for (const auto& t : out.tokens) {
    if (!seen.insert(t).second) throw RemoteError(Kind::kInvariantViolation, "duplicate token \"" + t + "\"");
  }
  return out;
}

RemoteCandidates query_remote(const RemoteEndpoint& endpoint, std::span<const std::string> context,
                              int top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  const auto url = split_url(endpoint.url);
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  json request = {{"context", json::array()}, {"top_k", top_k}};
  for (const auto& c : context) request["context"].push_back(c);

  auto result = client.Post(url.prefix + std::string(kNextTokenPath), request.dump(), "application/json");
  if (!result) {
    throw RemoteError(Kind::kTransport, "request to " + endpoint.url + " failed: " +
                                            httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw RemoteError(Kind::kHttpStatus,
                      endpoint.url + " answered HTTP " + std::to_string(result->status));
  }
  return parse_remote_response(result->body, top_k);
}

std::vector<double> renormalized(const RemoteCandidates& candidates) {
  double sum = 0.0;
  for (double p : candidates.probs) sum += p;
  std::vector<double> out;
  out.reserve(candidates.probs.size());
  for (double p : candidates.probs) out.push_back(p / sum);
  return out;
}

RemoteModel::RemoteModel(RemoteEndpoint endpoint, int top_k) : endpoint_(std::move(endpoint)), top_k_(top_k) {
  if (top_k_ < 1) throw std::invalid_argument("top_k must be at least 1");
}

TokenId RemoteModel::intern(std::string_view token) const {
  std::lock_guard lock(mutex_);
  return vocabulary_.add(token);
}

std::string RemoteModel::token_string(TokenId id) const {
  std::lock_guard lock(mutex_);
  return vocabulary_.token(id);
}

TokenDistribution RemoteModel::next_token_distribution(std::span<const TokenId> context) const {
  std::vector<std::string> strings;
  strings.reserve(context.size());
  for (TokenId id : context) strings.push_back(token_string(id));
  const auto candidates = query_remote(endpoint_, strings, top_k_);
  const auto probs = renormalized(candidates);
  std::vector<TokenProb> support;
  support.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    support.push_back({intern(candidates.tokens[i]), probs[i]});
  }
  return TokenDistribution(std::move(support));
}

std::vector<TokenId> RemoteModel::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& t : split_tokens(text)) ids.push_back(intern(t));
  return ids;
}

std::string RemoteModel::decode(std::span<const TokenId> tokens) const {
  std::vector<std::string> strings;
  strings.reserve(tokens.size());
  for (TokenId id : tokens) strings.push_back(token_string(id));
  return join_tokens(strings);
}

std::optional<TokenId> RemoteModel::token_id(std::string_view token) const { return intern(token); }

}  // namespace recipemc
