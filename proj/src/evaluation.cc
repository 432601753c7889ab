#include "recipemc/evaluation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "recipemc/rewards.h"

namespace recipemc {
namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_overlap(const std::map<NGram, std::size_t>& candidate,
                            const std::map<NGram, std::size_t>& reference) {
  std::size_t overlap = 0;
  for (const auto& [gram, n] : candidate) {
    if (auto it = reference.find(gram); it != reference.end()) overlap += std::min(n, it->second);
  }
  return overlap;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::string task_section(const Recipe& recipe, TaskKind task) {
  return task == TaskKind::kIngredientsFromName ? recipe.ingredients_text() : recipe.instructions_text();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace

std::vector<std::string> metric_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("ROUGE-n supports n = 1 or 2");
  const auto cand = ngram_counts(metric_tokens(candidate), static_cast<std::size_t>(n));
  const auto ref = ngram_counts(metric_tokens(reference), static_cast<std::size_t>(n));
  std::size_t cand_total = 0, ref_total = 0;
  for (const auto& [g, c] : cand) cand_total += c;
  for (const auto& [g, c] : ref) ref_total += c;
  if (cand_total == 0 && ref_total == 0) return 1.0;
  if (cand_total == 0 || ref_total == 0) return 0.0;
  const auto overlap = static_cast<double>(clipped_overlap(cand, ref));
  if (overlap == 0.0) return 0.0;
  const double precision = overlap / static_cast<double>(cand_total);
  const double recall = overlap / static_cast<double>(ref_total);
  return 2.0 * precision * recall / (precision + recall);
}

double bleu(std::string_view candidate, std::string_view reference) {
  const auto cand = metric_tokens(candidate);
  const auto ref = metric_tokens(reference);
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    const std::size_t total = cand.size() >= n ? cand.size() - n + 1 : 0;
    const auto matched = static_cast<double>(clipped_overlap(cand_counts, ref_counts));
    const double numerator = matched > 0.0 ? matched : kBleuEpsilon;
    log_sum += std::log(numerator / static_cast<double>(std::max<std::size_t>(total, 1)));
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return brevity * std::exp(log_sum / 4.0);
}

SetScores constituent_set_scores(std::string_view generated, std::string_view truth,
                                 const ConstituentLexicon& lexicon) {
  const auto g = distinct_constituents(lexicon, generated);
  const auto t = distinct_constituents(lexicon, truth);
  std::size_t common = 0;
  for (const auto& c : g) common += t.count(c);
  SetScores s;
  s.precision = g.empty() ? 1.0 : static_cast<double>(common) / static_cast<double>(g.size());
  s.recall = t.empty() ? 1.0 : static_cast<double>(common) / static_cast<double>(t.size());
  return s;
}

F1Result f1_score(std::span<const std::string> generated, std::span<const std::string> truth,
                  const ConstituentLexicon& lexicon) {
  if (generated.size() != truth.size()) throw EvaluationError("F1: generated and truth sizes differ");
  if (generated.empty()) throw EvaluationError("F1: no samples");
  std::vector<double> precisions, recalls;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto s = constituent_set_scores(generated[i], truth[i], lexicon);
    precisions.push_back(s.precision);
    recalls.push_back(s.recall);
  }
  F1Result r;
  r.precision = mean(precisions);
  r.recall = mean(recalls);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double coherence_metric(std::string_view decoded_text, TaskKind task, const ConstituentLexicon& lexicon) {
  const auto s = split_sections(decoded_text);
  return task == TaskKind::kIngredientsFromName
             ? name_ingredient_coherence(s.name, s.ingredients, lexicon)
             : ingredients_instructions_coherence(s.ingredients, s.instructions, lexicon);
}

double repetition_metric(std::string_view ingredients, const ConstituentLexicon& lexicon) {
  return static_cast<double>(constituent_repeats(lexicon, ingredients));
}

double perplexity(const LanguageModel& model, std::span<const ScoredSequence> sequences) {
  double log_sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : sequences) {
    if (s.prompt_len > s.tokens.size()) throw EvaluationError("perplexity: prompt longer than sequence");
    if (s.prompt_len == s.tokens.size()) continue;
    for (double lp : sequence_log_probs(model, s.tokens, s.prompt_len)) {
      log_sum += lp;
      ++count;
    }
  }
  if (count == 0) throw EvaluationError("perplexity: no generated tokens");
  return std::exp(-log_sum / static_cast<double>(count));
}

std::string generated_section(const Recipe& truth, TaskKind task, std::string_view output) {
  const std::string full = task_prompt(truth, task) + std::string(output);
  const auto s = split_sections(full);
  if (task == TaskKind::kIngredientsFromName) {
    const auto phrases = split_ingredients(s.ingredients);
    std::string out;
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      if (i) out += "; ";
      out += phrases[i];
    }
    return out;
  }
  return normalize_whitespace(s.instructions);
}

const MethodReport& EvaluationReport::row(std::string_view method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw EvaluationError("no report row for method \"" + std::string(method) + "\"");
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json out;
  out["task"] = std::string(task_name(task));
  out["methods"] = nlohmann::json::array();
  for (const auto& r : rows) {
    out["methods"].push_back({{"method", r.method},
                              {"n_samples", r.n_samples},
                              {"coherence", optional_json(r.coherence)},
                              {"f1-score", optional_json(r.f1)},
                              {"precision", optional_json(r.precision)},
                              {"recall", optional_json(r.recall)},
                              {"perplexity", optional_json(r.perplexity)},
                              {"rouge-1", optional_json(r.rouge1)},
                              {"rouge-2", optional_json(r.rouge2)},
                              {"bleu", optional_json(r.bleu)},
                              {"repetition", optional_json(r.repetition)},
                              {"avg_length", optional_json(r.avg_length)}});
  }
  return out;
}

std::string EvaluationReport::to_csv() const {
  std::string out =
      "Sampling Method,Coherence,F1-Score,Perplexity,ROUGE-1,ROUGE-2,BLEU,Repetition,Avg Length,Samples\n";
  for (const auto& r : rows) {
    out += r.method + "," + optional_csv(r.coherence) + "," + optional_csv(r.f1) + "," +
           optional_csv(r.perplexity) + "," + optional_csv(r.rouge1) + "," + optional_csv(r.rouge2) + "," +
           optional_csv(r.bleu) + "," + optional_csv(r.repetition) + "," + optional_csv(r.avg_length) + "," +
           std::to_string(r.n_samples) + "\n";
  }
  return out;
}

EvaluationReport evaluate_all(TaskKind task, const std::vector<Recipe>& truth,
                              const std::vector<MethodOutputs>& methods, const LanguageModel* model,
                              const ConstituentLexicon& lexicon) {
  if (truth.empty()) throw EvaluationError("no ground-truth recipes");
  if (methods.empty()) throw EvaluationError("no method outputs to evaluate");
  for (const auto& m : methods) {
    if (m.outputs.empty()) throw EvaluationError("method \"" + m.method + "\" has no outputs");
    if (m.outputs.size() != truth.size()) {
      throw EvaluationError("method \"" + m.method + "\" has " + std::to_string(m.outputs.size()) +
                            " outputs for " + std::to_string(truth.size()) + " ground-truth recipes");
    }
  }
  const bool ingredients = task == TaskKind::kIngredientsFromName;

  std::vector<std::string> truth_sections;
  for (const auto& r : truth) truth_sections.push_back(task_section(r, task));

  auto score_rows = [&](const std::string& label, const std::vector<std::string>& sections,
                        const std::vector<std::string>& continuations, bool with_references) {
    MethodReport row;
    row.method = label;
    row.n_samples = sections.size();
    std::vector<double> coherence, repetition, lengths, r1, r2, bl;
    std::vector<ScoredSequence> scored;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      const std::string prompt = task_prompt(truth[i], task);
      const std::string decoded = prompt + continuations[i];
      coherence.push_back(coherence_metric(decoded, task, lexicon));
      lengths.push_back(static_cast<double>(sections[i].size()));
      if (ingredients) repetition.push_back(repetition_metric(sections[i], lexicon));
      if (with_references) {
        r1.push_back(rouge_n(sections[i], truth_sections[i], 1));
        r2.push_back(rouge_n(sections[i], truth_sections[i], 2));
        bl.push_back(bleu(sections[i], truth_sections[i]));
      }
      if (model) {
        ScoredSequence s;
        s.prompt_len = model->encode(prompt).size();
        s.tokens = model->encode(decoded);
        if (s.tokens.size() > s.prompt_len) scored.push_back(std::move(s));
      }
    }
    row.coherence = mean(coherence);
    row.avg_length = mean(lengths);
    if (ingredients) row.repetition = mean(repetition);
    if (with_references) {
      row.rouge1 = mean(r1);
      row.rouge2 = mean(r2);
      row.bleu = mean(bl);
      if (ingredients) {
        const auto f = f1_score(sections, truth_sections, lexicon);
        row.f1 = f.f1;
        row.precision = f.precision;
        row.recall = f.recall;
      }
    }
    if (model && !scored.empty()) row.perplexity = perplexity(*model, scored);
    return row;
  };

  EvaluationReport report;
  report.task = task;

  std::vector<std::string> truth_continuations;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth_continuations.push_back(truth_sections[i] + std::string(task_stop_tag(task)));
  }
  report.rows.push_back(score_rows(std::string(kGroundTruthRow), truth_sections, truth_continuations, false));

  for (const auto& m : methods) {
    std::vector<std::string> sections;
    for (std::size_t i = 0; i < truth.size(); ++i) sections.push_back(generated_section(truth[i], task, m.outputs[i]));
    report.rows.push_back(score_rows(m.method, sections, m.outputs, true));
  }
  return report;
}

}  // namespace recipemc
