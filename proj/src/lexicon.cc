#include "recipemc/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace recipemc {
namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Bytes that belong to a word for matching purposes. Non-ASCII bytes are
// treated as letters so that UTF-8 words are not split apart.
bool is_word_byte(char c) { return is_ascii_alpha(c) || static_cast<unsigned char>(c) >= 0x80; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

const std::set<std::string>& unit_words() {
  static const std::set<std::string> units = {
      "bag",      "bags",      "bottle",   "bottles", "box",     "boxes",    "bunch",
      "bunches",  "c",         "can",      "cans",    "clove",   "cloves",   "container",
      "containers", "cup",     "cups",     "dash",    "dashes",  "envelope", "envelopes",
      "g",        "gal",       "gallon",   "gallons", "gram",    "grams",    "head",
      "heads",    "inch",      "inches",   "jar",     "jars",    "kg",       "l",
      "lb",       "lbs",       "liter",    "liters",  "ml",      "ounce",    "ounces",
      "oz",       "package",   "packages", "pinch",   "pinches", "pint",     "pints",
      "pkg",      "pound",     "pounds",   "pt",      "qt",      "quart",    "quarts",
      "slice",    "slices",    "sprig",    "sprigs",  "stick",   "sticks",   "t",
      "tablespoon", "tablespoons", "tbs",  "tbsp",    "teaspoon", "teaspoons", "tsp",
      "piece",    "pieces",    "handful",  "whole"};
  return units;
}

// Preparation and size words that precede the ingredient name.
const std::set<std::string>& descriptor_words() {
  static const std::set<std::string> words = {
      "beaten",   "boneless", "chilled",  "chopped",  "coarsely", "cold",     "cooked",
      "crushed",  "cubed",    "diced",    "dried",    "extra",    "finely",   "fresh",
      "freshly",  "frozen",   "grated",   "ground",   "halved",   "large",    "lean",
      "light",    "medium",   "melted",   "minced",   "packed",   "peeled",   "plain",
      "roughly",  "shredded", "sifted",   "skinless", "sliced",   "small",    "softened",
      "thawed",   "thinly",   "toasted",  "unsalted", "virgin",   "warm",     "of",
      "a",        "an"};
  return words;
}

// Trailing phrases removed from the end of the name span.
constexpr std::string_view kTrailingClauses[] = {" to taste", " for garnish", " as needed",
                                                 " or more", " or to taste", " for serving",
                                                 " divided", " optional"};

bool is_quantity_token(std::string_view token) {
  return !token.empty() && std::none_of(token.begin(), token.end(), is_ascii_alpha);
}

std::string strip_parentheses(std::string_view phrase) {
  std::string out;
  int depth = 0;
  for (char c : phrase) {
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (depth > 0) --depth;
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

std::string strip_trailing_clauses(std::string text) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto clause : kTrailingClauses) {
      if (text.size() >= clause.size() &&
          text.compare(text.size() - clause.size(), clause.size(), clause) == 0) {
        text.resize(text.size() - clause.size());
        changed = true;
      }
    }
  }
  return text;
}

// Removes leading quantity, unit and descriptor tokens.
std::string name_span(std::string_view part) {
  auto words = split_words(part);
  std::size_t first = 0;
  while (first < words.size()) {
    std::string w = words[first];
    if (!w.empty() && w.back() == '.') w.pop_back();
    if (is_quantity_token(w) || unit_words().count(w) || descriptor_words().count(w)) {
      ++first;
      continue;
    }
    break;
  }
  std::string out;
  for (std::size_t i = first; i < words.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

bool valid_entry_shape(std::string_view entry) {
  if (entry.empty() || entry.front() == ' ' || entry.back() == ' ') return false;
  char prev = 'x';
  for (char c : entry) {
    if (c == ' ') {
      if (prev == ' ') return false;
    } else if (c < 'a' || c > 'z') {
      return false;
    }
    prev = c;
  }
  return true;
}

bool has_stop_word(std::string_view entry, const std::set<std::string>& stop_words) {
  for (const auto& w : split_words(entry)) {
    if (stop_words.count(w)) return true;
  }
  return false;
}

struct Word {
  std::size_t begin;
  std::size_t end;
  bool joined_by_space;  // gap to the previous word is whitespace only
  std::string lowered;
};

std::vector<Word> scan_words(std::string_view text) {
  std::vector<Word> words;
  std::size_t i = 0;
  std::size_t prev_end = 0;
  while (i < text.size()) {
    if (!is_word_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < text.size() && is_word_byte(text[i])) ++i;
    bool joined = !words.empty();
    for (std::size_t k = prev_end; joined && k < begin; ++k) {
      if (!std::isspace(static_cast<unsigned char>(text[k]))) joined = false;
    }
    words.push_back({begin, i, joined, to_lower(text.substr(begin, i - begin))});
    prev_end = i;
  }
  return words;
}

}  // namespace

const std::set<std::string>& default_stop_words() {
  static const std::set<std::string> words = {"and", "or", "with", "in", "of", "to", "for"};
  return words;
}

std::set<std::string> extract_constituent_candidates(std::string_view phrase) {
  std::string text = strip_parentheses(phrase);
  if (auto comma = text.find(','); comma != std::string::npos) text.resize(comma);
  text = to_lower(normalize_whitespace(text));
  text = strip_trailing_clauses(text);

  // "salt and pepper", "stock or broth": each alternative is its own span.
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t cut = std::string::npos;
    std::size_t cut_len = 0;
    for (std::string_view sep : {std::string_view(" and "), std::string_view(" or ")}) {
      auto p = text.find(sep, start);
      if (p < cut) cut = p, cut_len = sep.size();
    }
    parts.push_back(text.substr(start, cut == std::string::npos ? std::string::npos : cut - start));
    if (cut == std::string::npos) break;
    start = cut + cut_len;
  }

  std::set<std::string> out;
  for (const auto& part : parts) {
    auto span = strip_trailing_clauses(name_span(part));
    if (!span.empty()) out.insert(span);
  }
  return out;
}

bool is_decomposable(std::string_view entry, const std::set<std::string>& entries) {
  auto words = split_words(entry);
  const std::size_t n = words.size();
  if (n < 2) return false;
  // reachable[i]: words[0..i) splits into entries using at least one cut.
  std::vector<int> parts(n + 1, -1);
  parts[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (parts[i] < 0) continue;
    std::string piece;
    for (std::size_t j = i; j < n; ++j) {
      if (j > i) piece.push_back(' ');
      piece += words[j];
      if (i == 0 && j + 1 == n) continue;  // the entry itself
      if (entries.count(piece)) parts[j + 1] = std::max(parts[j + 1], parts[i] + 1);
    }
  }
  return parts[n] >= 2;
}

ConstituentLexicon::ConstituentLexicon(std::vector<std::string> entries,
                                       const std::set<std::string>& stop_words) {
  std::sort(entries.begin(), entries.end());
  std::set<std::string> as_set;
  for (const auto& e : entries) {
    if (!valid_entry_shape(e)) {
      throw LexiconError("invalid constituent \"" + e + "\": expected lowercase letters and single spaces");
    }
    if (has_stop_word(e, stop_words)) throw LexiconError("constituent contains a stop word: \"" + e + "\"");
    if (!as_set.insert(e).second) throw LexiconError("duplicate constituent \"" + e + "\"");
  }
  for (const auto& e : entries) {
    if (is_decomposable(e, as_set)) throw LexiconError("decomposable constituent \"" + e + "\"");
    max_words_ = std::max(max_words_, split_words(e).size());
  }
  entries_ = std::move(entries);
  index_.insert(entries_.begin(), entries_.end());
}

ConstituentLexicon ConstituentLexicon::from_candidates(const std::set<std::string>& candidates,
                                                       const std::set<std::string>& stop_words,
                                                       LexiconBuildStats* stats) {
  LexiconBuildStats local;
  local.candidates = candidates.size();
  std::set<std::string> surviving;
  for (const auto& raw : candidates) {
    std::string c = normalize_whitespace(raw);
    if (!valid_entry_shape(c)) {
      ++local.dropped_non_alphabetic;
    } else if (has_stop_word(c, stop_words)) {
      ++local.dropped_stop_word;
    } else {
      surviving.insert(std::move(c));
    }
  }
  std::vector<std::string> kept;
  for (const auto& c : surviving) {
    if (is_decomposable(c, surviving)) {
      ++local.dropped_decomposable;
    } else {
      kept.push_back(c);
    }
  }
  if (stats) *stats = local;
  return ConstituentLexicon(std::move(kept), stop_words);
}

ConstituentLexicon build_lexicon(const std::vector<Recipe>& recipes,
                                 const std::set<std::string>& stop_words, LexiconBuildStats* stats) {
  std::set<std::string> candidates;
  for (const auto& recipe : recipes) {
    for (const auto& phrase : recipe.ingredients) {
      auto found = extract_constituent_candidates(phrase);
      candidates.insert(found.begin(), found.end());
    }
  }
  return ConstituentLexicon::from_candidates(candidates, stop_words, stats);
}

ConstituentLexicon ConstituentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot read lexicon " + path.string());
  std::vector<std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!entries.empty() && line <= entries.back()) {
      throw LexiconError(path.string() + ":" + std::to_string(line_no) +
                         ": entries must be sorted and unique");
    }
    entries.push_back(line);
  }
  return ConstituentLexicon(std::move(entries));
}

std::string ConstituentLexicon::to_text() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e;
    out.push_back('\n');
  }
  return out;
}

void ConstituentLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LexiconError("cannot write lexicon " + path.string());
  out << to_text();
}

bool ConstituentLexicon::contains(std::string_view entry) const {
  return index_.count(std::string(entry)) != 0;
}

std::vector<ConstituentMatch> ConstituentLexicon::matches(std::string_view text) const {
  std::vector<ConstituentMatch> found;
  if (entries_.empty()) return found;
  const auto words = scan_words(text);
  std::string key;
  std::size_t i = 0;
  while (i < words.size()) {
    // Longest run of whitespace-joined words starting at i, capped.
    std::size_t run = 1;
    while (run < max_words_ && i + run < words.size() && words[i + run].joined_by_space) ++run;
    std::size_t matched = 0;
    for (std::size_t len = run; len >= 1; --len) {
      key.clear();
      for (std::size_t k = 0; k < len; ++k) {
        if (k) key.push_back(' ');
        key += words[i + k].lowered;
      }
      if (index_.count(key)) {
        matched = len;
        break;
      }
    }
    if (matched) {
      found.push_back({key, words[i].begin, words[i + matched - 1].end});
      i += matched;
    } else {
      ++i;
    }
  }
  return found;
}

ConstituentCounts ConstituentLexicon::find(std::string_view text) const {
  ConstituentCounts counts;
  for (auto& m : matches(text)) ++counts[m.constituent];
  return counts;
}

std::set<std::string> distinct_constituents(const ConstituentLexicon& lexicon, std::string_view text) {
  std::set<std::string> out;
  for (auto& [c, n] : lexicon.find(text)) out.insert(c);
  return out;
}

std::size_t constituent_repeats(const ConstituentLexicon& lexicon, std::string_view text) {
  std::size_t repeats = 0;
  for (auto& [c, n] : lexicon.find(text)) repeats += n - 1;
  return repeats;
}

}  // namespace recipemc
