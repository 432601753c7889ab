#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "recipemc/recipe.h"

namespace recipemc::fixtures {

// Deterministic template recipes. Names are built from two or three key
// constituents plus a dish type; ingredients list the key constituents (one
// is occasionally dropped) among pantry fillers; instructions mention most
// ingredients. Every recipe passes Recipe::validate().
std::vector<Recipe> synthetic_recipes(std::size_t count, std::uint64_t seed);

}  // namespace recipemc::fixtures
