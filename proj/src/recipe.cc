#include "recipemc/recipe.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

namespace recipemc {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_blank(std::string_view s) { return std::all_of(s.begin(), s.end(), is_space); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct TagHit {
  std::size_t pos;
  int tag;  // index into kRecipeTags
};

// All tag occurrences in text order.
std::vector<TagHit> find_tags(std::string_view text) {
  std::vector<TagHit> hits;
  std::size_t pos = text.find("<|");
  while (pos != std::string_view::npos) {
    int matched = -1;
    for (int t = 0; t < 6; ++t) {
      if (text.compare(pos, kRecipeTags[t].size(), kRecipeTags[t]) == 0) {
        matched = t;
        break;
      }
    }
    if (matched >= 0) {
      hits.push_back({pos, matched});
      pos = text.find("<|", pos + kRecipeTags[matched].size());
    } else {
      pos = text.find("<|", pos + 2);
    }
  }
  return hits;
}

bool contains_tag(std::string_view s) { return !find_tags(s).empty(); }

void check_field(std::string_view field, std::string_view what) {
  if (field != normalize_whitespace(field)) {
    throw RecipeError(std::string(what) + " is not whitespace-normalized: \"" +
                      std::string(field) + "\"");
  }
  if (contains_tag(field)) {
    throw RecipeError(std::string(what) + " contains a structural tag");
  }
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += sep;
    out += p;
    first = false;
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::string_view task_name(TaskKind task) {
  return task == TaskKind::kIngredientsFromName ? "ingredients" : "instructions";
}

TaskKind parse_task(std::string_view name) {
  if (name == "ingredients") return TaskKind::kIngredientsFromName;
  if (name == "instructions") return TaskKind::kInstructionsFromNameAndIngredients;
  throw std::invalid_argument("unknown task \"" + std::string(name) +
                              "\" (expected ingredients or instructions)");
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

void Recipe::validate(Section upto) const {
  if (trim(name).empty()) throw RecipeError("recipe name is empty");
  check_field(name, "recipe name");
  if (upto == Section::kName) return;

  if (ingredients.empty()) throw RecipeError("empty section: ingredients");
  for (const auto& phrase : ingredients) {
    if (phrase.empty()) throw RecipeError("empty ingredient phrase");
    if (phrase.find(';') != std::string::npos) {
      throw RecipeError("ingredient phrase contains ';': \"" + phrase + "\"");
    }
    check_field(phrase, "ingredient phrase");
  }
  if (upto == Section::kIngredients) return;

  if (instructions.empty()) throw RecipeError("empty section: instructions");
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    const auto& sentence = instructions[i];
    if (sentence.empty()) throw RecipeError("empty instruction sentence");
    check_field(sentence, "instruction sentence");
    if (sentence.find(". ") != std::string::npos) {
      throw RecipeError("instruction sentence holds more than one sentence: \"" + sentence + "\"");
    }
    if (i + 1 < instructions.size() && sentence.back() != '.') {
      throw RecipeError("non-final instruction sentence must end with '.': \"" + sentence + "\"");
    }
  }
}

std::string Recipe::ingredients_text() const { return join(ingredients, "; "); }

std::string Recipe::instructions_text() const { return join(instructions, " "); }

std::string serialize_recipe(const Recipe& recipe, Section upto) {
  recipe.validate(upto);
  std::string out;
  out += kStartOfName;
  out += recipe.name;
  out += kEndOfName;
  if (upto == Section::kName) return out;
  out += kStartOfIngr;
  out += recipe.ingredients_text();
  out += kEndOfIngr;
  if (upto == Section::kIngredients) return out;
  out += kStartOfInst;
  out += recipe.instructions_text();
  out += kEndOfInst;
  return out;
}

std::string task_prompt(const Recipe& recipe, TaskKind task) {
  if (task == TaskKind::kIngredientsFromName) {
    return serialize_recipe(recipe, Section::kName) + std::string(kStartOfIngr);
  }
  return serialize_recipe(recipe, Section::kIngredients) + std::string(kStartOfInst);
}

std::string_view task_stop_tag(TaskKind task) {
  return task == TaskKind::kIngredientsFromName ? kEndOfIngr : kEndOfInst;
}

std::vector<std::string> split_ingredients(std::string_view text) {
  std::vector<std::string> phrases;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto semi = text.find(';', start);
    auto piece = text.substr(start, semi == std::string_view::npos ? std::string_view::npos
                                                                   : semi - start);
    auto normalized = normalize_whitespace(piece);
    if (!normalized.empty()) phrases.push_back(std::move(normalized));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return phrases;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::string normalized = normalize_whitespace(text);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < normalized.size(); ++i) {
    if (normalized[i] == '.' && normalized[i + 1] == ' ') {
      sentences.push_back(normalized.substr(start, i + 1 - start));
      start = i + 2;
    }
  }
  if (start < normalized.size()) sentences.push_back(normalized.substr(start));
  return sentences;
}

ParsedRecipe parse_recipe(std::string_view text) {
  const auto hits = find_tags(text);
  if (hits.empty()) throw RecipeParseError("missing <|startofname|> tag", 0);

  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].tag != static_cast<int>(i)) {
      throw RecipeParseError("unexpected tag " + std::string(kRecipeTags[hits[i].tag]) +
                                 " at byte " + std::to_string(hits[i].pos) + " (expected " +
                                 std::string(kRecipeTags[i]) + ")",
                             hits[i].pos);
    }
  }
  if (!is_blank(text.substr(0, hits[0].pos))) {
    throw RecipeParseError("text before <|startofname|>", 0);
  }

  auto tag_end = [&](std::size_t i) { return hits[i].pos + kRecipeTags[hits[i].tag].size(); };
  // Content between hit i and hit i+1 (or the end of text).
  auto between = [&](std::size_t i) {
    std::size_t begin = tag_end(i);
    std::size_t end = i + 1 < hits.size() ? hits[i + 1].pos : text.size();
    return text.substr(begin, end - begin);
  };

  ParsedRecipe parsed;
  std::array<std::optional<std::string_view>, 3> content;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i % 2 == 0) {
      content[i / 2] = between(i);
    } else if (!is_blank(between(i))) {
      std::size_t at = tag_end(i);
      throw RecipeParseError("unexpected text after " + std::string(kRecipeTags[i]) +
                                 " at byte " + std::to_string(at),
                             at);
    }
  }
  parsed.trailing_open = hits.size() % 2 == 1;

  parsed.recipe.name = normalize_whitespace(*content[0]);
  if (parsed.recipe.name.empty()) throw RecipeParseError("empty recipe name", hits[0].pos);
  if (content[1]) parsed.recipe.ingredients = split_ingredients(*content[1]);
  if (content[2]) parsed.recipe.instructions = split_sentences(*content[2]);

  const std::size_t closed = hits.size() / 2;
  parsed.completeness = closed >= 3   ? Completeness::kComplete
                        : closed == 2 ? Completeness::kIngredients
                                      : Completeness::kNameOnly;
  return parsed;
}

SectionView split_sections(std::string_view text) {
  SectionView view;
  const auto hits = find_tags(text);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].tag % 2 != 0) continue;
    std::size_t begin = hits[i].pos + kRecipeTags[hits[i].tag].size();
    std::size_t end = i + 1 < hits.size() ? hits[i + 1].pos : text.size();
    auto body = text.substr(begin, end - begin);
    switch (hits[i].tag) {
      case 0:
        if (!view.has_name) view.name = body, view.has_name = true;
        break;
      case 2:
        if (!view.has_ingredients) view.ingredients = body, view.has_ingredients = true;
        break;
      case 4:
        if (!view.has_instructions) view.instructions = body, view.has_instructions = true;
        break;
    }
  }
  return view;
}

Dataset clean_records(std::string_view tsv_text, const CleaningRules& rules) {
  Dataset out;
  std::vector<std::string> keywords;
  for (const auto& k : rules.advertisement_keywords) {
    if (!k.empty()) keywords.push_back(to_lower(k));
  }

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < tsv_text.size()) {
    auto nl = tsv_text.find('\n', start);
    auto line = tsv_text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                    : nl - start);
    start = nl == std::string_view::npos ? tsv_text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;
    if (line_no == 1 && line == "name\tingredients\tinstructions") continue;

    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DatasetError("line " + std::to_string(line_no) + ": expected 3 tab-separated columns, found " +
                         std::to_string(fields.size()));
    }
    ++out.report.total;

    if (contains_tag(line)) {
      ++out.report.dropped_malformed;
      continue;
    }
    std::string name_field(fields[0]);
    std::string inst_field(fields[2]);
    std::replace(name_field.begin(), name_field.end(), ';', ',');
    std::replace(inst_field.begin(), inst_field.end(), ';', ',');

    Recipe recipe;
    recipe.name = normalize_whitespace(name_field);
    recipe.ingredients = split_ingredients(fields[1]);
    recipe.instructions = split_sentences(inst_field);

    if (recipe.name.empty() || recipe.ingredients.empty() || recipe.instructions.empty() ||
        recipe.ingredients_text().size() < rules.min_ingredients_chars ||
        recipe.instructions_text().size() < rules.min_instructions_chars) {
      ++out.report.dropped_empty_or_short;
      continue;
    }
    const std::string lowered = to_lower(line);
    if (std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
          return lowered.find(k) != std::string::npos;
        })) {
      ++out.report.dropped_advertisement;
      continue;
    }
    try {
      recipe.validate();
    } catch (const RecipeError&) {
      ++out.report.dropped_malformed;
      continue;
    }
    out.recipes.push_back(std::move(recipe));
  }
  out.report.retained = out.recipes.size();
  if (out.recipes.empty()) {
    out.report.warnings.push_back("no records retained after cleaning");
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const CleaningRules& rules) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read dataset " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return clean_records(buffer.str(), rules);
}

std::string to_dataset_line(const Recipe& recipe) {
  recipe.validate();
  return recipe.name + "\t" + join(recipe.ingredients, ";") + "\t" + recipe.instructions_text();
}

}  // namespace recipemc
