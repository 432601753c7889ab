#include "recipemc/synthetic_corpus.h"

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "recipemc/decoding.h"

namespace recipemc::fixtures {
namespace {

struct Item {
  std::string_view name;
  std::string_view title;
  std::array<std::string_view, 3> amounts;
};

// Key constituents that appear in names.
constexpr Item kKeys[] = {
    {"chicken", "Chicken", {"2 lbs boneless chicken", "1 pound chicken, cubed", "4 pieces chicken"}},
    {"shrimp", "Shrimp", {"1 lb shrimp, peeled", "2 cups cooked shrimp", "12 oz frozen shrimp"}},
    {"beef", "Beef", {"1 lb lean beef", "2 pounds beef, cubed", "1 lb ground beef"}},
    {"pork", "Pork", {"2 lbs pork", "1 pound pork, sliced", "4 pieces pork"}},
    {"salmon", "Salmon", {"1 lb salmon", "2 pieces salmon", "12 oz salmon, cubed"}},
    {"garlic", "Garlic", {"3 cloves garlic, minced", "2 cloves garlic", "1 tsp minced garlic"}},
    {"tomato", "Tomato", {"2 cups diced tomato", "1 can tomato", "3 large tomato, chopped"}},
    {"basil", "Basil", {"1/4 cup fresh basil", "2 tbsp chopped basil", "1 tsp dried basil"}},
    {"lemon", "Lemon", {"1 lemon, juiced", "2 tbsp lemon juice", "1 tsp grated lemon"}},
    {"spinach", "Spinach", {"2 cups fresh spinach", "1 package frozen spinach", "4 cups spinach"}},
    {"mushroom", "Mushroom", {"1 cup sliced mushroom", "8 oz mushroom", "2 cups mushroom, chopped"}},
    {"potato", "Potato", {"4 medium potato, cubed", "2 lbs potato", "3 large potato, peeled"}},
    {"broccoli", "Broccoli", {"2 cups broccoli", "1 head broccoli, chopped", "1 package frozen broccoli"}},
    {"zucchini", "Zucchini", {"2 medium zucchini", "1 large zucchini, sliced", "3 cups zucchini"}},
    {"carrot", "Carrot", {"2 carrot, diced", "1 cup shredded carrot", "3 large carrot"}},
    {"bacon", "Bacon", {"6 slices bacon", "1/2 lb bacon, diced", "4 slices cooked bacon"}},
    {"cheddar cheese", "Cheddar", {"1 cup shredded cheddar cheese", "2 cups cheddar cheese", "8 oz cheddar cheese"}},
    {"black beans", "Black Bean", {"1 can black beans", "2 cups cooked black beans", "1 cup black beans"}},
    {"corn", "Corn", {"1 can corn", "2 cups frozen corn", "1 cup corn"}},
    {"rice", "Rice", {"2 cups cooked rice", "1 cup rice", "3 cups rice"}},
    {"apple", "Apple", {"3 apple, peeled", "2 large apple, sliced", "4 cups chopped apple"}},
    {"banana", "Banana", {"3 banana", "2 large banana, mashed", "1 cup mashed banana"}},
    {"pecans", "Pecan", {"1 cup chopped pecans", "1/2 cup pecans", "3/4 cup toasted pecans"}},
    {"honey", "Honey", {"1/4 cup honey", "2 tbsp honey", "3 tbsp honey"}},
    {"ginger", "Ginger", {"1 tbsp grated ginger", "1 tsp ground ginger", "2 tsp minced ginger"}},
    {"coconut", "Coconut", {"1 cup shredded coconut", "1 can coconut milk", "1/2 cup coconut"}},
    {"pumpkin", "Pumpkin", {"1 can pumpkin", "2 cups pumpkin", "1 cup pumpkin"}},
    {"chickpeas", "Chickpea", {"1 can chickpeas", "2 cups cooked chickpeas", "1 cup chickpeas"}},
    {"cauliflower", "Cauliflower", {"1 head cauliflower", "3 cups cauliflower", "2 cups chopped cauliflower"}},
    {"sweet potato", "Sweet Potato", {"2 sweet potato, cubed", "3 cups sweet potato", "1 large sweet potato"}},
    {"oats", "Oatmeal", {"2 cups oats", "1 cup quick oats", "1 1/2 cups oats"}},
    {"blueberries", "Blueberry", {"1 cup blueberries", "2 cups fresh blueberries", "1 cup frozen blueberries"}},
};

// Pantry fillers that never appear in names.
constexpr Item kFillers[] = {
    {"salt", "", {"1 tsp salt", "1/2 tsp salt", "salt to taste"}},
    {"pepper", "", {"1/2 tsp pepper", "1/4 tsp pepper", "pepper to taste"}},
    {"olive oil", "", {"2 tbsp olive oil", "1/4 cup olive oil", "1 tbsp olive oil"}},
    {"butter", "", {"2 tbsp butter", "1/2 cup butter, melted", "1/4 cup butter"}},
    {"onion", "", {"1 onion, chopped", "1 large onion, diced", "1/2 cup chopped onion"}},
    {"flour", "", {"2 cups flour", "1/4 cup flour", "1 cup flour"}},
    {"sugar", "", {"1 cup sugar", "1/2 cup sugar", "2 tbsp sugar"}},
    {"eggs", "", {"2 eggs", "3 eggs, beaten", "1 cup eggs"}},
    {"milk", "", {"1 cup milk", "1/2 cup milk", "2 cups milk"}},
    {"water", "", {"1 cup water", "2 cups water", "1/2 cup water"}},
    {"parsley", "", {"2 tbsp chopped parsley", "1/4 cup fresh parsley", "1 tsp dried parsley"}},
    {"paprika", "", {"1 tsp paprika", "1/2 tsp paprika", "2 tsp paprika"}},
    {"cinnamon", "", {"1 tsp cinnamon", "1/2 tsp ground cinnamon", "2 tsp cinnamon"}},
    {"vanilla", "", {"1 tsp vanilla", "2 tsp vanilla", "1/2 tsp vanilla"}},
    {"chicken broth", "", {"2 cups chicken broth", "1 can chicken broth", "4 cups chicken broth"}},
    {"soy sauce", "", {"2 tbsp soy sauce", "1/4 cup soy sauce", "1 tbsp soy sauce"}},
    {"baking soda", "", {"1 tsp baking soda", "1/2 tsp baking soda", "1/4 tsp baking soda"}},
    {"sour cream", "", {"1 cup sour cream", "1/2 cup sour cream", "8 oz sour cream"}},
};

constexpr std::string_view kDishes[] = {"Soup",   "Salad",    "Casserole", "Stir Fry", "Pie",   "Bread",
                                        "Tacos",  "Curry",    "Bake",      "Muffins",  "Stew",  "Skillet",
                                        "Pasta",  "Fritters", "Chili",     "Bowl"};

constexpr std::string_view kPrefixes[] = {"Easy", "Grandma's", "Quick", "Spicy", "Creamy", "Baked"};

constexpr std::string_view kOpenings[] = {"Preheat oven to 350 degrees.", "Heat a large skillet over medium heat.",
                                          "Bring a large pot of water to a boil.", "Grease a baking dish."};

constexpr std::string_view kVerbs[] = {"Add the", "Stir in the", "Mix in the", "Toss the", "Combine the"};

constexpr std::string_view kCooking[] = {"Cook for 5 minutes.", "Simmer for 20 minutes.",
                                         "Bake for 30 minutes.", "Stir well.", "Cover and cook for 10 minutes."};

constexpr std::string_view kClosings[] = {"Serve warm.", "Serve immediately.", "Let cool before serving.",
                                          "Garnish and serve."};

class Picker {
 public:
  explicit Picker(std::uint64_t seed) : rng_(seed) {}
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng_.uniform() * static_cast<double>(n)));
  }
  bool chance(double p) { return rng_.uniform() < p; }
  template <typename T, std::size_t N>
  const T& from(const T (&items)[N]) {
    return items[index(N)];
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  Rng rng_;
};

// Distinct indices drawn without replacement.
std::vector<std::size_t> draw(Picker& pick, std::size_t pool, std::size_t count) {
  std::vector<std::size_t> out;
  while (out.size() < count) {
    const auto i = pick.index(pool);
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

std::string mention(const std::vector<const Item*>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += i + 1 == items.size() ? " and " : ", ";
    out += items[i]->name;
  }
  return out;
}

Recipe make_recipe(Picker& pick) {
  constexpr std::size_t kKeyCount = std::size(kKeys);
  constexpr std::size_t kFillerCount = std::size(kFillers);

  const auto key_idx = draw(pick, kKeyCount, 2 + pick.index(2));
  std::vector<const Item*> keys;
  for (auto i : key_idx) keys.push_back(&kKeys[i]);

  Recipe r;
  if (pick.chance(0.25)) r.name = std::string(pick.from(kPrefixes)) + " ";
  for (const auto* k : keys) r.name += std::string(k->title) + " ";
  r.name += pick.from(kDishes);

  std::vector<const Item*> listed;
  for (const auto* k : keys) {
    if (!pick.chance(0.1)) listed.push_back(k);
  }
  for (auto i : draw(pick, kFillerCount, 2 + pick.index(4))) listed.push_back(&kFillers[i]);
  pick.shuffle(listed);
  for (const auto* item : listed) r.ingredients.emplace_back(item->amounts[pick.index(3)]);

  r.instructions.emplace_back(pick.from(kOpenings));
  std::vector<const Item*> pending;
  for (const auto* item : listed) {
    if (pick.chance(0.85)) pending.push_back(item);
  }
  for (std::size_t i = 0; i < pending.size();) {
    const std::size_t group = std::min<std::size_t>(pending.size() - i, 1 + pick.index(3));
    std::vector<const Item*> part(pending.begin() + static_cast<std::ptrdiff_t>(i),
                                  pending.begin() + static_cast<std::ptrdiff_t>(i + group));
    r.instructions.push_back(std::string(pick.from(kVerbs)) + " " + mention(part) + ".");
    if (pick.chance(0.5)) r.instructions.emplace_back(pick.from(kCooking));
    i += group;
  }
  r.instructions.emplace_back(pick.from(kClosings));
  return r;
}

}  // namespace

std::vector<Recipe> synthetic_recipes(std::size_t count, std::uint64_t seed) {
  Picker pick(seed);
  std::vector<Recipe> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(make_recipe(pick));
    out.back().validate();
  }
  return out;
}

}  // namespace recipemc::fixtures
