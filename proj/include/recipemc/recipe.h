#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace recipemc {

// Structural tags of the recipe text format.
inline constexpr std::string_view kStartOfName = "<|startofname|>";
inline constexpr std::string_view kEndOfName = "<|endofname|>";
inline constexpr std::string_view kStartOfIngr = "<|startofingr|>";
inline constexpr std::string_view kEndOfIngr = "<|endofingr|>";
inline constexpr std::string_view kStartOfInst = "<|startofinst|>";
inline constexpr std::string_view kEndOfInst = "<|endofinst|>";

// All six tags in the order they appear in a complete recipe.
inline constexpr std::string_view kRecipeTags[6] = {
    kStartOfName, kEndOfName, kStartOfIngr, kEndOfIngr, kStartOfInst, kEndOfInst};

class RecipeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by parse_recipe. `position` is the byte offset of the offending tag.
class RecipeParseError : public RecipeError {
 public:
  RecipeParseError(const std::string& what, std::size_t position)
      : RecipeError(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskKind { kIngredientsFromName, kInstructionsFromNameAndIngredients };

std::string_view task_name(TaskKind task);
// Accepts "ingredients" or "instructions".
TaskKind parse_task(std::string_view name);

enum class Section { kName, kIngredients, kInstructions };

// A recipe with whitespace-normalized fields. Instructions are kept as
// sentences; joining them with single spaces restores the original text.
struct Recipe {
  std::string name;
  std::vector<std::string> ingredients;
  std::vector<std::string> instructions;

  // Throws RecipeError when an invariant is violated. Sections after `upto`
  // are not checked.
  void validate(Section upto = Section::kInstructions) const;

  std::string ingredients_text() const;   // phrases joined by "; "
  std::string instructions_text() const;  // sentences joined by " "

  friend bool operator==(const Recipe&, const Recipe&) = default;
};

std::string serialize_recipe(const Recipe& recipe, Section upto);

// Prompt for a task: the sections preceding the one to be generated, plus the
// opening tag of the generated section.
std::string task_prompt(const Recipe& recipe, TaskKind task);

// Tag that closes the generated section for a task.
std::string_view task_stop_tag(TaskKind task);

enum class Completeness { kNameOnly, kIngredients, kComplete };

struct ParsedRecipe {
  Recipe recipe;
  Completeness completeness = Completeness::kNameOnly;
  // True when the last opened section has no closing tag.
  bool trailing_open = false;
};

// Strict parser. Tags must appear at most once and in order; text between
// sections must be blank. The final opened section may be unterminated.
ParsedRecipe parse_recipe(std::string_view text);

// Raw, non-validating view of the sections of any text. A section spans from
// its opening tag to the next tag of any kind (or the end of the text). Used
// for scoring partial generations, so it never throws.
struct SectionView {
  std::string_view name;
  std::string_view ingredients;
  std::string_view instructions;
  bool has_name = false;
  bool has_ingredients = false;
  bool has_instructions = false;
};
SectionView split_sections(std::string_view text);

// Splits ingredient-list text on ';', trimming and dropping empty phrases.
std::vector<std::string> split_ingredients(std::string_view text);
// Splits instruction text after sentence-final periods followed by whitespace.
std::vector<std::string> split_sentences(std::string_view text);

// Trims and collapses whitespace runs to single spaces.
std::string normalize_whitespace(std::string_view text);

struct CleaningRules {
  std::size_t min_ingredients_chars = 10;
  std::size_t min_instructions_chars = 20;
  // Case-insensitive substrings marking advertisement text.
  std::vector<std::string> advertisement_keywords;
};

struct CleaningReport {
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t dropped_empty_or_short = 0;
  std::size_t dropped_advertisement = 0;
  std::size_t dropped_malformed = 0;
  std::vector<std::string> warnings;
};

struct Dataset {
  std::vector<Recipe> recipes;
  CleaningReport report;
};

// Reads a tab-separated dataset (name, ingredients joined by ';',
// instructions). A first line equal to "name\tingredients\tinstructions" is
// treated as a header.
Dataset load_dataset(const std::filesystem::path& path, const CleaningRules& rules);
Dataset clean_records(std::string_view tsv_text, const CleaningRules& rules);

// Inverse of load_dataset for already-clean recipes.
std::string to_dataset_line(const Recipe& recipe);

}  // namespace recipemc
