#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recipemc/language_model.h"
#include "recipemc/lexicon.h"
#include "recipemc/recipe.h"

namespace recipemc {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercased alphanumeric words; every other character separates words.
std::vector<std::string> metric_tokens(std::string_view text);

// ROUGE-n F1 with clipped n-gram overlap. Empty on one side gives 0, empty on
// both sides gives 1.
double rouge_n(std::string_view candidate, std::string_view reference, int n);

inline constexpr double kBleuEpsilon = 1e-9;

// Sentence BLEU: geometric mean of clipped 1..4-gram precisions (a zero match
// count is replaced by kBleuEpsilon) times the brevity penalty.
double bleu(std::string_view candidate, std::string_view reference);

struct SetScores {
  double precision = 0.0;
  double recall = 0.0;
};
// Constituent-set precision/recall of one sample (1 for an empty denominator).
SetScores constituent_set_scores(std::string_view generated, std::string_view truth,
                                 const ConstituentLexicon& lexicon);

struct F1Result {
  double precision = 0.0;  // mean over samples
  double recall = 0.0;     // mean over samples
  double f1 = 0.0;         // harmonic mean of the two means
};
F1Result f1_score(std::span<const std::string> generated, std::span<const std::string> truth,
                  const ConstituentLexicon& lexicon);

// Coherence of a decoded text (prompt plus generation) for a task: the same
// value as the task's coherence reward.
double coherence_metric(std::string_view decoded_text, TaskKind task, const ConstituentLexicon& lexicon);

// Sum over constituents of (occurrences - 1) in one ingredient list.
double repetition_metric(std::string_view ingredients, const ConstituentLexicon& lexicon);

struct ScoredSequence {
  std::vector<TokenId> tokens;
  std::size_t prompt_len = 0;
};
// exp of the negative mean log-probability over all generated positions,
// pooled across sequences. Sequences without generated tokens are skipped;
// throws EvaluationError when nothing is left.
double perplexity(const LanguageModel& model, std::span<const ScoredSequence> sequences);

struct MethodReport {
  std::string method;
  std::size_t n_samples = 0;
  std::optional<double> coherence;
  std::optional<double> f1;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> perplexity;
  std::optional<double> rouge1;
  std::optional<double> rouge2;
  std::optional<double> bleu;
  std::optional<double> repetition;
  std::optional<double> avg_length;
};

struct EvaluationReport {
  TaskKind task = TaskKind::kIngredientsFromName;
  std::vector<MethodReport> rows;  // ground truth first, then methods in input order

  const MethodReport& row(std::string_view method) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

inline constexpr std::string_view kGroundTruthRow = "ground_truth";

struct MethodOutputs {
  std::string method;
  // Raw generated continuations, aligned with the ground-truth recipes.
  std::vector<std::string> outputs;
};

// Generated section text of one output, normalized the way ground truth is
// stored (phrases joined by "; ", or whitespace-collapsed sentences).
std::string generated_section(const Recipe& truth, TaskKind task, std::string_view output);

// Fills every metric for every method plus the ground-truth reference row.
// Perplexity is skipped when `model` is null.
EvaluationReport evaluate_all(TaskKind task, const std::vector<Recipe>& truth,
                              const std::vector<MethodOutputs>& methods, const LanguageModel* model,
                              const ConstituentLexicon& lexicon);

}  // namespace recipemc
