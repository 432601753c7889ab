#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "recipemc/rewards.h"
#include "test_support.h"

using namespace recipemc;

namespace {

const std::string kJambalayaName = "John And Sarah’s Best Sausage, Shrimp, Ham And Chicken Jambalaya";
const std::string kJambalayaBaseline =
    "4 celery ribs, chopped; 3-4 lbs chicken thighs; 1 teaspoon black pepper; 3 cups long grain white rice; "
    "2 tablespoons garlic, chopped; 6 bay leaves; 1 teaspoon cayenne; 2 teaspoons salt; 1 lb smoked sausage; "
    "1 teaspoon dried thyme; 1 cup green bell pepper, chopped; 1 cup ham, diced; 1 cup sweet onion, chopped; "
    "2 cups chicken stock or 2 cups chicken broth; 4 cups water; 1 1/2 cups scallions, chopped; "
    "8 tablespoons vegetable oil; 1 teaspoon oregano; 3 cups tomatoes, chopped (2 lb); 1 teaspoon white pepper";

const std::string kCasseroleIngredients =
    "1 1/2 tablespoons mayonnaise; 1 tablespoon minced green onion; cooking spray; 1 cup cornmeal; "
    "1/4 cup grated pepper Jack cheese; 1/2 teaspoon baking soda; 1/2 cup grated pepper Jack cheese; "
    "1/4 teaspoon Worcestershire sauce; 1/2 cup melted butter; 1 cup buttermilk; 8 ounces cooked crabmeat; "
    "2 eggs; salt to taste; 1 cup all-purpose flour; 1 teaspoon Asian chili paste (sambal); "
    "1 teaspoon fresh grated lemon zest; 1/2 teaspoon salt";

// Instructions mentioning every listed constituent except lemon zest.
const std::string kCasseroleInstructions =
    "Preheat the oven to 400 degrees F. Spray 12 muffin cups with cooking spray. Combine cornmeal, flour, "
    "baking soda, and salt in a large bowl. Whisk together buttermilk, butter, eggs, pepper Jack cheese, "
    "mayonnaise, chili paste or sambal, green onion, and Worcestershire sauce in a separate bowl. "
    "Fold in the crabmeat.";

std::vector<std::string> casserole_entries(bool with_salt) {
  std::vector<std::string> e{"mayonnaise", "green onion", "cooking spray", "cornmeal",   "pepper jack cheese",
                             "baking soda", "worcestershire", "sauce",      "butter",     "buttermilk",
                             "crabmeat",   "eggs",          "flour",        "chili paste", "sambal",
                             "lemon zest"};
  if (with_salt) e.push_back("salt");
  return e;
}

std::shared_ptr<const ConstituentLexicon> shared(std::vector<std::string> entries) {
  return std::make_shared<const ConstituentLexicon>(std::move(entries));
}

}  // namespace

TEST(Coherence, JambalayaMissingShrimp) {
  const ConstituentLexicon lex({"sausage", "shrimp", "ham", "chicken", "garlic", "salt", "celery"});
  EXPECT_EQ(distinct_constituents(lex, kJambalayaName).size(), 4u);
  EXPECT_DOUBLE_EQ(name_ingredient_coherence(kJambalayaName, kJambalayaBaseline, lex), 0.75);
  EXPECT_DOUBLE_EQ(name_ingredient_coherence(kJambalayaName, kJambalayaBaseline + "; 1/2 lb shrimp", lex), 1.0);
}

TEST(Coherence, NameWithoutConstituentsIsOne) {
  const ConstituentLexicon lex({"salt"});
  EXPECT_DOUBLE_EQ(name_ingredient_coherence("Grandma's Special", "1 cup water", lex), 1.0);
  EXPECT_DOUBLE_EQ(ingredients_instructions_coherence("1 cup water", "Boil.", lex), 1.0);
}

TEST(Coherence, LemonZestSixteenOfSeventeen) {
  const ConstituentLexicon lex(casserole_entries(true));
  EXPECT_EQ(distinct_constituents(lex, kCasseroleIngredients).size(), 17u);
  EXPECT_DOUBLE_EQ(ingredients_instructions_coherence(kCasseroleIngredients, kCasseroleInstructions, lex),
                   16.0 / 17.0);
  EXPECT_DOUBLE_EQ(ingredients_instructions_coherence(kCasseroleIngredients,
                                                      kCasseroleInstructions + " Top with lemon zest.", lex),
                   1.0);
}

TEST(Repetition, NoRepeatsIsOne) {
  const ConstituentLexicon lex({"salt", "flour"});
  EXPECT_DOUBLE_EQ(constituent_repetition_penalty("1 cup flour; 1 tsp salt", lex), 1.0);
}

TEST(Repetition, OneRepeatIsInverseE) {
  const ConstituentLexicon lex({"salt", "flour"});
  const double v = constituent_repetition_penalty("1 cup flour; 1 tsp salt; salt to taste", lex);
  EXPECT_NEAR(v, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(v, 0.367879, 1e-6);
}

TEST(Repetition, CasserolePepperJackTwice) {
  const ConstituentLexicon lex(casserole_entries(false));
  const auto terms = repetition_terms(kCasseroleIngredients, lex);
  EXPECT_EQ(terms.constituent_repeats, 1u);
  EXPECT_EQ(terms.phrase_repeats, 0u);
  EXPECT_NEAR(constituent_repetition_penalty(kCasseroleIngredients, lex), std::exp(-1.0), 1e-12);
}

TEST(Repetition, DuplicatePhrasesCountInQ) {
  const ConstituentLexicon lex({"salt"});
  const auto terms = repetition_terms("1 tsp Salt; 1 tsp salt ;  1 tsp salt; water; water", lex);
  EXPECT_EQ(terms.constituent_repeats, 2u);
  EXPECT_EQ(terms.phrase_repeats, 3u);
  EXPECT_NEAR(constituent_repetition_penalty("1 tsp Salt; 1 tsp salt ;  1 tsp salt; water; water", lex),
              std::exp(-5.0), 1e-15);
}

TEST(Repetition, StrictlyDecreasingWithEachRepeat) {
  const ConstituentLexicon lex({"salt", "pepper"});
  std::string text = "1 tsp salt";
  double prev = constituent_repetition_penalty(text, lex);
  for (int i = 2; i < 8; ++i) {
    text += "; " + std::to_string(i) + " pinch salt";
    const double v = constituent_repetition_penalty(text, lex);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(ClosingTag, PresenceOnly) {
  EXPECT_EQ(closing_tag_reward("1 egg<|endofingr|>", kEndOfIngr), 1.0);
  EXPECT_EQ(closing_tag_reward("1 egg; 2 cups", kEndOfIngr), 0.0);
  EXPECT_EQ(closing_tag_reward("1 egg<|endofingr|> and more", kEndOfIngr), 1.0);
  EXPECT_EQ(closing_tag_reward("Mix.<|endofinst|>", kEndOfInst), 1.0);
  EXPECT_THROW(closing_tag_reward("x", kStartOfIngr), std::invalid_argument);
}

TEST(SpecialChars, Counting) {
  EXPECT_DOUBLE_EQ(special_char_penalty("Mix well."), 1.0);
  EXPECT_NEAR(special_char_penalty("Wow!!!", 3.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(special_char_penalty("mix - then - serve!"), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(special_char_penalty("mix - then - serve!"), 0.367879, 1e-6);
}

TEST(Combine, AllOnesIsOne) {
  const auto lex = shared({"salt", "flour"});
  const auto spec = RewardSpec::defaults(TaskKind::kIngredientsFromName, lex);
  EXPECT_NEAR(spec.combine("<|startofname|>Salt Bread<|endofname|><|startofingr|>1 tsp salt; 2 cups flour<|endofingr|>"),
              1.0, 1e-12);
}

TEST(Combine, WeightedSumExample) {
  const auto lex = shared({"salt", "flour", "pepper"});
  const auto spec = RewardSpec::defaults(TaskKind::kIngredientsFromName, lex);
  // Name has salt and pepper; ingredients cover salt only and repeat flour once.
  const std::string text =
      "<|startofname|>Salt Pepper Bread<|endofname|><|startofingr|>1 tsp salt; 2 cups flour; 1 cup flour<|endofingr|>";
  const auto values = spec.component_values(text);
  ASSERT_EQ(values.size(), 3u);
  EXPECT_NEAR(values[0], 0.5, 1e-12);
  EXPECT_NEAR(values[1], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(values[2], 1.0, 1e-12);
  const double q = spec.combine(text);
  EXPECT_NEAR(q, 0.30 * 0.5 + 0.45 * std::exp(-1.0) + 0.25 * 1.0, 1e-9);
  EXPECT_NEAR(q, 0.5656, 1e-4);
}

TEST(Combine, InstructionDefaults) {
  const auto lex = shared({"salt", "flour"});
  const auto spec = RewardSpec::defaults(TaskKind::kInstructionsFromNameAndIngredients, lex);
  ASSERT_EQ(spec.components().size(), 3u);
  EXPECT_EQ(spec.components()[0].component, RewardComponent::kIngredientsInstructionsCoherence);
  EXPECT_DOUBLE_EQ(spec.components()[0].weight, 0.50);
  EXPECT_EQ(spec.components()[1].component, RewardComponent::kSpecialCharPenalty);
  EXPECT_DOUBLE_EQ(spec.components()[1].weight, 0.20);
  EXPECT_EQ(spec.components()[2].component, RewardComponent::kClosingInstructions);
  EXPECT_DOUBLE_EQ(spec.components()[2].weight, 0.30);
  const std::string text =
      "<|startofname|>Bread<|endofname|><|startofingr|>1 tsp salt; 2 cups flour<|endofingr|>"
      "<|startofinst|>Mix the flour!!! Bake";
  EXPECT_NEAR(spec.combine(text), 0.5 * 0.5 + 0.2 * std::exp(-1.0) + 0.0, 1e-12);
}

TEST(RewardSpecTest, InvalidWeights) {
  const auto lex = shared({"salt"});
  using C = RewardComponent;
  EXPECT_THROW(RewardSpec(TaskKind::kIngredientsFromName, {{C::kNameIngredientCoherence, 0.5},
                                                           {C::kClosingIngredients, 0.4}}, lex),
               RewardSpecError);
  EXPECT_THROW(RewardSpec(TaskKind::kIngredientsFromName, {{C::kNameIngredientCoherence, 1.0}}, lex),
               RewardSpecError);
  EXPECT_THROW(RewardSpec(TaskKind::kIngredientsFromName, {{C::kNameIngredientCoherence, 1.2},
                                                           {C::kClosingIngredients, -0.2}}, lex),
               RewardSpecError);
}

TEST(RewardSpecTest, JsonRoundTrip) {
  const auto lex = shared({"salt"});
  const auto spec = RewardSpec::defaults(TaskKind::kInstructionsFromNameAndIngredients, lex);
  const auto json = spec.to_json();
  EXPECT_EQ(json["task"], "instructions");
  EXPECT_EQ(json["components"][1]["name"], "special_char_penalty");
  const auto back = RewardSpec::from_json(json, lex);
  EXPECT_EQ(back.to_json(), json);
  auto bad = json;
  bad["components"][0]["name"] = "made_up";
  EXPECT_THROW(RewardSpec::from_json(bad, lex), std::invalid_argument);
}

TEST(RewardProperties, BoundsLinearityMonotonicity) {
  const auto lex = shared({"salt", "flour", "green onion", "onion", "pepper"});
  const auto ingr = RewardSpec::defaults(TaskKind::kIngredientsFromName, lex);
  const auto inst = RewardSpec::defaults(TaskKind::kInstructionsFromNameAndIngredients, lex);
  std::mt19937_64 rng(17);
  const std::vector<std::string> words{"salt", "flour", "green", "onion", "pepper", "1", "cup", ";", "-",
                                       "!", "<|endofingr|>", "<|endofinst|>", "<|startofinst|>", "mix"};
  for (int i = 0; i < 500; ++i) {
    const std::string text = "<|startofname|>" + testing_support::random_text(rng, words, 4) +
                             "<|endofname|><|startofingr|>" + testing_support::random_text(rng, words, 20);
    for (const auto* spec : {&ingr, &inst}) {
      const auto values = spec->component_values(text);
      double dot = 0.0;
      for (std::size_t k = 0; k < values.size(); ++k) {
        EXPECT_GE(values[k], 0.0);
        EXPECT_LE(values[k], 1.0);
        dot += spec->components()[k].weight * values[k];
      }
      const double q = spec->combine(text);
      EXPECT_NEAR(q, dot, 1e-12);
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
    }
    const auto name = testing_support::random_text(rng, words, 5);
    const auto list = testing_support::random_text(rng, words, 10);
    const double before = name_ingredient_coherence(name, list, *lex);
    for (const auto& c : distinct_constituents(*lex, name)) {
      EXPECT_GE(name_ingredient_coherence(name, list + "; " + c, *lex), before);
    }
  }
}
