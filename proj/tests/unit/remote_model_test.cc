#include <gtest/gtest.h>

#include "json.hpp"
#include "recipemc/remote_model.h"
#include "test_support.h"

using namespace recipemc;
using Kind = RemoteError::Kind;

namespace {

Kind kind_of(const std::string& body, int k = 5) {
  try {
    parse_remote_response(body, k);
  } catch (const RemoteError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << body;
  return Kind::kTransport;
}

}  // namespace

TEST(RemoteParse, RenormalizesPriors) {
  const auto c = parse_remote_response(R"({"tokens":["5","9"],"probs":[0.6,0.3]})", 5);
  const auto p = renormalized(c);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(RemoteParse, TypedErrors) {
  EXPECT_EQ(kind_of(R"({"tokens":["a","b"],"probs":[0.9,0.8]})"), Kind::kInvariantViolation);  // sums to 1.7
  EXPECT_EQ(kind_of("not json"), Kind::kMalformedResponse);
  EXPECT_EQ(kind_of(R"({"tokens":["a"]})"), Kind::kMalformedResponse);
  EXPECT_EQ(kind_of(R"({"tokens":["a","b"],"probs":[0.5]})"), Kind::kMalformedResponse);
  EXPECT_EQ(kind_of(R"({"tokens":[1],"probs":[0.5]})"), Kind::kMalformedResponse);
  EXPECT_EQ(kind_of(R"({"tokens":[],"probs":[]})"), Kind::kInvariantViolation);
  EXPECT_EQ(kind_of(R"({"tokens":["a","b"],"probs":[0.2,0.5]})"), Kind::kInvariantViolation);
  EXPECT_EQ(kind_of(R"({"tokens":["a","a"],"probs":[0.5,0.2]})"), Kind::kInvariantViolation);
  EXPECT_EQ(kind_of(R"({"tokens":["a"],"probs":[0.0]})"), Kind::kInvariantViolation);
  EXPECT_EQ(kind_of(R"({"tokens":["a","b","c"],"probs":[0.5,0.2,0.1]})", 2), Kind::kInvariantViolation);
}

TEST(RemoteQuery, StubServerRoundTrip) {
  nlohmann::json seen;
  testing_support::StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"tokens":["salt","<|endofingr|>"],"probs":[0.5,0.25]})", "application/json");
  });
  const std::vector<std::string> ctx{"<|startofingr|>", "1", "tsp"};
  const auto c = query_remote(RemoteEndpoint{server.url()}, ctx, 3);
  EXPECT_EQ(seen["context"], nlohmann::json(ctx));
  EXPECT_EQ(seen["top_k"], 3);
  EXPECT_EQ(c.tokens, (std::vector<std::string>{"salt", "<|endofingr|>"}));

  RemoteModel model(RemoteEndpoint{server.url()}, 3);
  const auto prompt = model.encode("<|startofname|>Soup<|endofname|><|startofingr|>");
  const auto dist = model.next_token_distribution(prompt);
  EXPECT_NEAR(dist.total(), 1.0, 1e-12);
  EXPECT_NEAR(dist.probability(*model.token_id("salt")), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(model.decode(std::vector<TokenId>{prompt[0], *model.token_id("salt")}), "<|startofname|>salt");
}

TEST(RemoteQuery, HttpStatusAndTransportErrors) {
  testing_support::StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  try {
    query_remote(RemoteEndpoint{server.url()}, std::vector<std::string>{"a"}, 2);
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.kind(), Kind::kHttpStatus);
  }
  const std::string dead = "http://127.0.0.1:1";
  try {
    query_remote(RemoteEndpoint{dead, std::chrono::milliseconds(500)}, std::vector<std::string>{"a"}, 2);
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.kind(), Kind::kTransport);
    EXPECT_NE(std::string(e.what()).find(dead), std::string::npos);
  }
  EXPECT_THROW(query_remote(RemoteEndpoint{"ftp://x"}, std::vector<std::string>{"a"}, 2), RemoteError);
}
