#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recipemc/lexicon.h"
#include "recipemc/recipe.h"

namespace recipemc {

class RewardSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// z_f / z, where z counts distinct constituents in the recipe name and z_f
// those that also occur in the generated ingredients; 1 when z = 0.
double name_ingredient_coherence(std::string_view name, std::string_view generated_ingredients,
                                 const ConstituentLexicon& lexicon);

// Same ratio between the ingredient list and the generated instructions.
double ingredients_instructions_coherence(std::string_view ingredients,
                                          std::string_view generated_instructions,
                                          const ConstituentLexicon& lexicon);

struct RepetitionTerms {
  std::size_t constituent_repeats = 0;  // p: occurrences beyond the first, per constituent
  std::size_t phrase_repeats = 0;       // q: duplicate ';'-separated phrases
};
RepetitionTerms repetition_terms(std::string_view generated_ingredients, const ConstituentLexicon& lexicon);

// exp(-p - q).
double constituent_repetition_penalty(std::string_view generated_ingredients,
                                      const ConstituentLexicon& lexicon);

// 1 if `tag` occurs anywhere in `text`. Only the two closing tags of the
// generated sections are accepted.
double closing_tag_reward(std::string_view text, std::string_view tag);

inline constexpr std::string_view kDefaultSpecialChars = "!-";
inline constexpr double kDefaultSpecialScale = 3.0;

// exp(-s / scale), s = number of characters of `chars` in the text.
double special_char_penalty(std::string_view generated_instructions, double scale = kDefaultSpecialScale,
                            std::string_view chars = kDefaultSpecialChars);

enum class RewardComponent {
  kNameIngredientCoherence,
  kConstituentRepetition,
  kClosingIngredients,
  kIngredientsInstructionsCoherence,
  kSpecialCharPenalty,
  kClosingInstructions,
};

std::string_view component_name(RewardComponent component);
RewardComponent parse_component(std::string_view name);

struct WeightedComponent {
  RewardComponent component;
  double weight;
};

// Weighted soft-constraint reward q = sum_i w_i r_i over a decoded text
// (prompt plus generation). Every component maps any text to [0, 1], so the
// combination is total and bounded.
class RewardSpec {
 public:
  // Throws RewardSpecError unless every weight lies in (0, 1) and the weights
  // sum to 1 within 1e-9.
  RewardSpec(TaskKind task, std::vector<WeightedComponent> components,
             std::shared_ptr<const ConstituentLexicon> lexicon, double special_scale = kDefaultSpecialScale,
             std::string special_chars = std::string(kDefaultSpecialChars));

  // Ingredients: coherence 0.30, repetition 0.45, closing tag 0.25.
  // Instructions: coherence 0.50, special characters 0.20, closing tag 0.30.
  static RewardSpec defaults(TaskKind task, std::shared_ptr<const ConstituentLexicon> lexicon);

  // {"task": "ingredients", "components": [{"name": ..., "weight": ...}, ...],
  //  "special_chars": "!-", "special_scale": 3}
  static RewardSpec from_json(const nlohmann::json& config, std::shared_ptr<const ConstituentLexicon> lexicon);
  nlohmann::json to_json() const;

  double component_value(RewardComponent component, std::string_view decoded_text) const;
  std::vector<double> component_values(std::string_view decoded_text) const;
  double combine(std::string_view decoded_text) const;

  TaskKind task() const noexcept { return task_; }
  const std::vector<WeightedComponent>& components() const noexcept { return components_; }
  const ConstituentLexicon& lexicon() const noexcept { return *lexicon_; }

 private:
  TaskKind task_;
  std::vector<WeightedComponent> components_;
  std::shared_ptr<const ConstituentLexicon> lexicon_;
  double special_scale_;
  std::string special_chars_;
};

}  // namespace recipemc
