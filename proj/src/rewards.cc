#include "recipemc/rewards.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace recipemc {
namespace {

double coverage(std::string_view source, std::string_view target, const ConstituentLexicon& lexicon) {
  const auto wanted = distinct_constituents(lexicon, source);
  if (wanted.empty()) return 1.0;
  const auto present = lexicon.find(target);
  std::size_t found = 0;
  for (const auto& c : wanted) found += present.count(c);
  return static_cast<double>(found) / static_cast<double>(wanted.size());
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

double name_ingredient_coherence(std::string_view name, std::string_view generated_ingredients,
                                 const ConstituentLexicon& lexicon) {
  return coverage(name, generated_ingredients, lexicon);
}

double ingredients_instructions_coherence(std::string_view ingredients,
                                          std::string_view generated_instructions,
                                          const ConstituentLexicon& lexicon) {
  return coverage(ingredients, generated_instructions, lexicon);
}

RepetitionTerms repetition_terms(std::string_view generated_ingredients, const ConstituentLexicon& lexicon) {
  RepetitionTerms terms;
  terms.constituent_repeats = constituent_repeats(lexicon, generated_ingredients);
  std::map<std::string, std::size_t> phrases;
  for (auto& phrase : split_ingredients(generated_ingredients)) ++phrases[lowercase(std::move(phrase))];
  for (auto& [phrase, n] : phrases) terms.phrase_repeats += n - 1;
  return terms;
}

double constituent_repetition_penalty(std::string_view generated_ingredients,
                                      const ConstituentLexicon& lexicon) {
  const auto t = repetition_terms(generated_ingredients, lexicon);
  return std::exp(-static_cast<double>(t.constituent_repeats) - static_cast<double>(t.phrase_repeats));
}

double closing_tag_reward(std::string_view text, std::string_view tag) {
  if (tag != kEndOfIngr && tag != kEndOfInst) {
    throw std::invalid_argument("closing tag reward expects <|endofingr|> or <|endofinst|>");
  }
  return text.find(tag) != std::string_view::npos ? 1.0 : 0.0;
}

double special_char_penalty(std::string_view generated_instructions, double scale, std::string_view chars) {
  if (!(scale > 0.0)) throw std::invalid_argument("special character scale must be positive");
  const auto s = std::count_if(generated_instructions.begin(), generated_instructions.end(),
                               [&](char c) { return chars.find(c) != std::string_view::npos; });
  return std::exp(-static_cast<double>(s) / scale);
}

std::string_view component_name(RewardComponent component) {
  switch (component) {
    case RewardComponent::kNameIngredientCoherence: return "name_ingredient_coherence";
    case RewardComponent::kConstituentRepetition: return "constituent_repetition_penalty";
    case RewardComponent::kClosingIngredients: return "closing_ingredients";
    case RewardComponent::kIngredientsInstructionsCoherence: return "ingredients_instructions_coherence";
    case RewardComponent::kSpecialCharPenalty: return "special_char_penalty";
    case RewardComponent::kClosingInstructions: return "closing_instructions";
  }
  return "unknown";
}

RewardComponent parse_component(std::string_view name) {
  for (auto c : {RewardComponent::kNameIngredientCoherence, RewardComponent::kConstituentRepetition,
                 RewardComponent::kClosingIngredients, RewardComponent::kIngredientsInstructionsCoherence,
                 RewardComponent::kSpecialCharPenalty, RewardComponent::kClosingInstructions}) {
    if (component_name(c) == name) return c;
  }
  throw RewardSpecError("unknown reward component \"" + std::string(name) + "\"");
}

RewardSpec::RewardSpec(TaskKind task, std::vector<WeightedComponent> components,
                       std::shared_ptr<const ConstituentLexicon> lexicon, double special_scale,
                       std::string special_chars)
    : task_(task),
      components_(std::move(components)),
      lexicon_(std::move(lexicon)),
      special_scale_(special_scale),
      special_chars_(std::move(special_chars)) {
  if (!lexicon_) throw RewardSpecError("reward spec needs a lexicon");
  if (components_.empty()) throw RewardSpecError("reward spec has no components");
  double sum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0 && c.weight < 1.0)) {
      throw RewardSpecError("weight of " + std::string(component_name(c.component)) + " must lie in (0, 1)");
    }
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw RewardSpecError("reward weights sum to " + std::to_string(sum) + ", expected 1");
  }
  if (!(special_scale_ > 0.0)) throw RewardSpecError("special_scale must be positive");
}

RewardSpec RewardSpec::defaults(TaskKind task, std::shared_ptr<const ConstituentLexicon> lexicon) {
  if (task == TaskKind::kIngredientsFromName) {
    return RewardSpec(task,
                      {{RewardComponent::kNameIngredientCoherence, 0.30},
                       {RewardComponent::kConstituentRepetition, 0.45},
                       {RewardComponent::kClosingIngredients, 0.25}},
                      std::move(lexicon));
  }
  return RewardSpec(task,
                    {{RewardComponent::kIngredientsInstructionsCoherence, 0.50},
                     {RewardComponent::kSpecialCharPenalty, 0.20},
                     {RewardComponent::kClosingInstructions, 0.30}},
                    std::move(lexicon));
}

RewardSpec RewardSpec::from_json(const nlohmann::json& config, std::shared_ptr<const ConstituentLexicon> lexicon) {
  try {
    const TaskKind task = parse_task(config.at("task").get<std::string>());
    std::vector<WeightedComponent> components;
    for (const auto& item : config.at("components")) {
      components.push_back({parse_component(item.at("name").get<std::string>()), item.at("weight").get<double>()});
    }
    return RewardSpec(task, std::move(components), std::move(lexicon),
                      config.value("special_scale", kDefaultSpecialScale),
                      config.value("special_chars", std::string(kDefaultSpecialChars)));
  } catch (const nlohmann::json::exception& e) {
    throw RewardSpecError(std::string("invalid reward config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw RewardSpecError(e.what());
  }
}

nlohmann::json RewardSpec::to_json() const {
  nlohmann::json out;
  out["task"] = std::string(task_name(task_));
  out["components"] = nlohmann::json::array();
  for (const auto& c : components_) {
    out["components"].push_back({{"name", std::string(component_name(c.component))}, {"weight", c.weight}});
  }
  out["special_chars"] = special_chars_;
  out["special_scale"] = special_scale_;
  return out;
}

double RewardSpec::component_value(RewardComponent component, std::string_view decoded_text) const {
  const auto sections = split_sections(decoded_text);
  switch (component) {
    case RewardComponent::kNameIngredientCoherence:
      return name_ingredient_coherence(sections.name, sections.ingredients, *lexicon_);
    case RewardComponent::kConstituentRepetition:
      return constituent_repetition_penalty(sections.ingredients, *lexicon_);
    case RewardComponent::kClosingIngredients:
      return closing_tag_reward(decoded_text, kEndOfIngr);
    case RewardComponent::kIngredientsInstructionsCoherence:
      return ingredients_instructions_coherence(sections.ingredients, sections.instructions, *lexicon_);
    case RewardComponent::kSpecialCharPenalty:
      return special_char_penalty(sections.instructions, special_scale_, special_chars_);
    case RewardComponent::kClosingInstructions:
      return closing_tag_reward(decoded_text, kEndOfInst);
  }
  return 0.0;
}

std::vector<double> RewardSpec::component_values(std::string_view decoded_text) const {
  std::vector<double> values;
  values.reserve(components_.size());
  for (const auto& c : components_) values.push_back(component_value(c.component, decoded_text));
  return values;
}

double RewardSpec::combine(std::string_view decoded_text) const {
  const auto values = component_values(decoded_text);
  double q = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) q += components_[i].weight * values[i];
  return q;
}

}  // namespace recipemc
