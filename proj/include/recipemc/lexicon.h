#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "recipemc/recipe.h"

namespace recipemc {

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default stop words; entries containing any of them are rejected.
const std::set<std::string>& default_stop_words();

// Ingredient-name span of a single ingredient phrase, lowercased. Quantities,
// unit words, parenthesized comments, leading preparation words and trailing
// clauses after a comma are removed. Returns an empty set when nothing is left.
std::set<std::string> extract_constituent_candidates(std::string_view phrase);

struct LexiconBuildStats {
  std::size_t candidates = 0;
  std::size_t dropped_non_alphabetic = 0;
  std::size_t dropped_stop_word = 0;
  std::size_t dropped_decomposable = 0;
};

// Constituent count map produced by ConstituentLexicon::find.
using ConstituentCounts = std::map<std::string, std::size_t>;

// A matched constituent span in the original text (byte offsets).
struct ConstituentMatch {
  std::string constituent;
  std::size_t begin;
  std::size_t end;
};

// Immutable set of base ingredient names with longest-match lookup.
class ConstituentLexicon {
 public:
  ConstituentLexicon() = default;

  // Validates entries: lowercase alphabetic words separated by single spaces,
  // no stop words, unique, not decomposable into other entries.
  explicit ConstituentLexicon(std::vector<std::string> entries,
                              const std::set<std::string>& stop_words = default_stop_words());

  // Filters raw candidates by the lexicon rules and builds the lexicon.
  static ConstituentLexicon from_candidates(const std::set<std::string>& candidates,
                                            const std::set<std::string>& stop_words,
                                            LexiconBuildStats* stats = nullptr);

  static ConstituentLexicon load(const std::filesystem::path& path);
  // One entry per line, sorted, trailing newline.
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  const std::vector<std::string>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view entry) const;

  // Case-insensitive, word-boundary, longest-match-wins scan. Multi-word
  // entries only match across plain whitespace.
  std::vector<ConstituentMatch> matches(std::string_view text) const;
  ConstituentCounts find(std::string_view text) const;

 private:
  std::vector<std::string> entries_;  // sorted
  std::unordered_set<std::string> index_;
  std::size_t max_words_ = 0;
};

ConstituentLexicon build_lexicon(const std::vector<Recipe>& recipes,
                                 const std::set<std::string>& stop_words = default_stop_words(),
                                 LexiconBuildStats* stats = nullptr);

// True if `entry` splits into two or more space-joined parts that are all in
// `entries` (excluding `entry` itself).
bool is_decomposable(std::string_view entry, const std::set<std::string>& entries);

// Constituent-level helpers shared by rewards and metrics.
std::set<std::string> distinct_constituents(const ConstituentLexicon& lexicon, std::string_view text);
// Sum over constituents of (occurrences - 1).
std::size_t constituent_repeats(const ConstituentLexicon& lexicon, std::string_view text);

}  // namespace recipemc
