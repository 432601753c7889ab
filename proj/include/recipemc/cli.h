#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recipemc/decoding.h"
#include "recipemc/language_model.h"
#include "recipemc/recipe.h"
#include "recipemc/rewards.h"

namespace recipemc::cli {

inline constexpr const char* kEndpointEnv = "RECIPEMC_ENDPOINT";

// Runs one command line (without the program name). Returns the exit status:
// 0 on success, 1 when some samples failed, 2 on usage or fatal errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main_entry(int argc, char** argv);

struct GenerateRequest {
  TaskKind task = TaskKind::kIngredientsFromName;
  SamplingMethod method = SamplingMethod::kTopP;
  GenerationConfig config;                 // rng_seed is the master seed
  std::shared_ptr<const RewardSpec> reward;  // required for MCTS
  int jobs = 1;
  bool trace = false;
};

struct SampleOutcome {
  std::size_t index = 0;
  std::string name;
  std::string prompt;
  std::string output;
  std::uint64_t seed = 0;
  bool stopped = false;
  std::optional<std::string> error;
  std::vector<nlohmann::json> trace;  // MCTS iterations when requested
};

// Generates one continuation per input recipe. Results are in input order;
// failures are recorded per sample instead of thrown.
std::vector<SampleOutcome> generate_samples(const LanguageModel& model, const std::vector<Recipe>& inputs,
                                            const GenerateRequest& request);

// One line of a generations file.
nlohmann::json sample_json(const SampleOutcome& sample, SamplingMethod method);

// Manifest path written next to an artifact.
std::filesystem::path manifest_path(const std::filesystem::path& artifact);

}  // namespace recipemc::cli
