// Writes a deterministic synthetic recipe dataset (tab-separated).
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "recipemc/recipe.h"
#include "recipemc/synthetic_corpus.h"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic recipe dataset", "make_corpus"};
  std::size_t count = 5000;
  std::uint64_t seed = 1;
  std::size_t skip = 0;
  std::string out;
  app.add_option("--count", count, "Recipes to write");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--skip", skip, "Drop the first N generated recipes (for held-out splits)");
  app.add_option("--out", out, "Output file")->required();
  CLI11_PARSE(app, argc, argv);

  const auto recipes = recipemc::fixtures::synthetic_recipes(skip + count, seed);
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  file << "name\tingredients\tinstructions\n";
  for (std::size_t i = skip; i < recipes.size(); ++i) file << recipemc::to_dataset_line(recipes[i]) << "\n";
  return file.good() ? 0 : 1;
}
