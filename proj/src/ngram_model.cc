#include "recipemc/ngram_model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace recipemc {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_parameters(int order, const std::vector<double>& weights, double floor) {
  if (order < 1) throw ModelError("n-gram order must be at least 1");
  if (weights.size() != static_cast<std::size_t>(order)) {
    throw ModelError("expected " + std::to_string(order) + " interpolation weights, got " +
                     std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ModelError("interpolation weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelError("interpolation weights must sum to 1");
  if (!(floor > 0.0 && floor < 1.0)) throw ModelError("floor mass must lie in (0, 1)");
}

}  // namespace

std::size_t NGramModel::KeyHash::operator()(const std::vector<TokenId>& key) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (TokenId t : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<double> NGramModel::default_weights(int order) {
  switch (order) {
    case 1: return {1.0};
    case 2: return {0.8, 0.2};
    case 3: return {0.7, 0.2, 0.1};
    default: break;
  }
  // Halving weights from the highest order down, normalized.
  std::vector<double> w(static_cast<std::size_t>(std::max(order, 1)));
  double v = 1.0;
  for (auto& x : w) {
    x = v;
    v /= 2.0;
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= sum;
  return w;
}

NGramModel::NGramModel(Vocabulary vocabulary, int order, std::vector<double> weights, double floor,
                       std::vector<Table> tables)
    : VocabularyModel(std::move(vocabulary)),
      order_(order),
      weights_(std::move(weights)),
      floor_(floor),
      tables_(std::move(tables)) {}

NGramModel NGramModel::train(const std::vector<std::string>& corpus, int order,
                             std::vector<double> weights, double floor) {
  check_parameters(order, weights, floor);
  if (corpus.empty()) throw ModelError("cannot train on an empty corpus");

  Vocabulary vocabulary;
  std::vector<std::vector<TokenId>> sequences;
  sequences.reserve(corpus.size());
  for (const auto& text : corpus) {
    std::vector<TokenId> ids;
    for (const auto& t : split_tokens(text)) ids.push_back(vocabulary.add(t));
    sequences.push_back(std::move(ids));
  }

  std::vector<std::unordered_map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>, KeyHash>>
      raw(static_cast<std::size_t>(order));
  std::size_t total_tokens = 0;
  std::vector<TokenId> ctx;
  for (const auto& seq : sequences) {
    total_tokens += seq.size();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      for (int k = 1; k <= order; ++k) {
        const auto ctx_len = static_cast<std::size_t>(k - 1);
        if (ctx_len > i) break;
        ctx.assign(seq.begin() + static_cast<std::ptrdiff_t>(i - ctx_len),
                   seq.begin() + static_cast<std::ptrdiff_t>(i));
        ++raw[static_cast<std::size_t>(k - 1)][ctx][seq[i]];
      }
    }
  }
  if (total_tokens == 0) throw ModelError("cannot train on a corpus without tokens");

  std::vector<Table> tables(static_cast<std::size_t>(order));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    for (auto& [key, counts] : raw[k]) {
      Continuations c;
      for (auto& [tok, n] : counts) {
        c.counts.emplace_back(tok, n);
        c.total += n;
      }
      tables[k].emplace(key, std::move(c));
    }
  }
  return NGramModel(std::move(vocabulary), order, std::move(weights), floor, std::move(tables));
}

std::vector<NGramModel::ActiveOrder> NGramModel::active_orders(std::span<const TokenId> context) const {
  std::vector<ActiveOrder> active;
  double weight_sum = 0.0;
  for (int k = 1; k <= order_; ++k) {
    const auto ctx_len = static_cast<std::size_t>(k - 1);
    if (ctx_len > context.size()) break;
    const auto suffix = context.last(ctx_len);
    const auto& table = tables_[static_cast<std::size_t>(k - 1)];
    auto it = table.find(std::vector<TokenId>(suffix.begin(), suffix.end()));
    if (it == table.end() || it->second.total == 0) continue;
    const double w = weights_[static_cast<std::size_t>(order_ - k)];
    active.push_back({w, &it->second});
    weight_sum += w;
  }
  for (auto& a : active) a.weight /= weight_sum;
  return active;
}

TokenDistribution NGramModel::next_token_distribution(std::span<const TokenId> context) const {
  const auto v = vocabulary().size();
  std::vector<double> probs(v, floor_ / static_cast<double>(v));
  for (const auto& a : active_orders(context)) {
    const double scale = (1.0 - floor_) * a.weight / static_cast<double>(a.continuations->total);
    for (auto [tok, n] : a.continuations->counts) {
      probs[static_cast<std::size_t>(tok)] += scale * static_cast<double>(n);
    }
  }
  std::vector<TokenProb> support(v);
  for (std::size_t i = 0; i < v; ++i) support[i] = {static_cast<TokenId>(i), probs[i]};
  return TokenDistribution(std::move(support));
}

double NGramModel::token_probability(std::span<const TokenId> context, TokenId token) const {
  const auto v = vocabulary().size();
  if (token < 0 || static_cast<std::size_t>(token) >= v) return 0.0;
  double p = floor_ / static_cast<double>(v);
  for (const auto& a : active_orders(context)) {
    const auto& counts = a.continuations->counts;
    auto it = std::lower_bound(counts.begin(), counts.end(), token,
                               [](const auto& entry, TokenId t) { return entry.first < t; });
    if (it != counts.end() && it->first == token) {
      p += (1.0 - floor_) * a.weight * static_cast<double>(it->second) /
           static_cast<double>(a.continuations->total);
    }
  }
  return p;
}

std::string NGramModel::to_text() const {
  std::ostringstream out;
  out << kFileMagic << ' ' << kFileVersion << '\n';
  out << "order " << order_ << '\n';
  out << "weights";
  for (double w : weights_) out << ' ' << format_double(w);
  out << '\n';
  out << "floor " << format_double(floor_) << '\n';
  out << "vocab " << vocabulary().size() << '\n';
  for (const auto& t : vocabulary().tokens()) out << t << '\n';
  for (std::size_t k = 0; k < tables_.size(); ++k) {
    std::map<std::vector<TokenId>, const Continuations*> sorted;
    for (const auto& [key, c] : tables_[k]) sorted.emplace(key, &c);
    out << "table " << (k + 1) << ' ' << sorted.size() << '\n';
    for (const auto& [key, c] : sorted) {
      for (TokenId t : key) out << t << ' ';
      out << '|';
      for (auto [tok, n] : c->counts) out << ' ' << tok << ':' << n;
      out << '\n';
    }
  }
  return out.str();
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError("cannot write model " + path.string());
  out << to_text();
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

NGramModel NGramModel::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& why) -> ModelError { return ModelError("bad model file: " + why); };

  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kFileMagic) throw fail("missing header");
  if (version != kFileVersion) throw fail("unsupported version " + std::to_string(version));

  std::string word;
  int order = 0;
  in >> word >> order;
  if (word != "order" || order < 1) throw fail("order");
  in >> word;
  if (word != "weights") throw fail("weights");
  std::vector<double> weights(static_cast<std::size_t>(order));
  for (auto& w : weights) in >> w;
  double floor = 0.0;
  in >> word >> floor;
  if (word != "floor") throw fail("floor");
  std::size_t vocab_size = 0;
  in >> word >> vocab_size;
  if (word != "vocab" || !in) throw fail("vocab");
  check_parameters(order, weights, floor);

  Vocabulary vocabulary;
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (!std::getline(in, line)) throw fail("truncated vocabulary");
    if (vocabulary.add(line) != static_cast<TokenId>(i)) throw fail("vocabulary order mismatch at " + line);
  }

  std::vector<Table> tables(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    std::size_t n_contexts = 0;
    int table_order = 0;
    in >> word >> table_order >> n_contexts;
    if (word != "table" || table_order != k) throw fail("table header for order " + std::to_string(k));
    std::getline(in, line);
    for (std::size_t c = 0; c < n_contexts; ++c) {
      if (!std::getline(in, line)) throw fail("truncated table");
      auto bar = line.find('|');
      if (bar == std::string::npos) throw fail("context line without '|'");
      std::istringstream ctx_in(line.substr(0, bar));
      std::vector<TokenId> key;
      TokenId t;
      while (ctx_in >> t) key.push_back(t);
      if (key.size() != static_cast<std::size_t>(k - 1)) throw fail("context length");
      Continuations cont;
      std::istringstream counts_in(line.substr(bar + 1));
      std::string pair;
      while (counts_in >> pair) {
        auto colon = pair.find(':');
        if (colon == std::string::npos) throw fail("count entry " + pair);
        auto tok = static_cast<TokenId>(std::stol(pair.substr(0, colon)));
        auto n = static_cast<std::uint64_t>(std::stoull(pair.substr(colon + 1)));
        if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_size) throw fail("token id out of range");
        cont.counts.emplace_back(tok, n);
        cont.total += n;
      }
      for (TokenId id : key) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) throw fail("context id out of range");
      }
      tables[static_cast<std::size_t>(k - 1)].emplace(std::move(key), std::move(cont));
    }
  }
  if (tables[0].empty()) throw fail("no unigram counts");
  return NGramModel(std::move(vocabulary), order, std::move(weights), floor, std::move(tables));
}

}  // namespace recipemc
