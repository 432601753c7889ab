#include "recipemc/cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "recipemc/evaluation.h"
#include "recipemc/lexicon.h"
#include "recipemc/mcts.h"
#include "recipemc/ngram_model.h"
#include "recipemc/remote_model.h"

namespace recipemc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitSampleFailures = 1;
constexpr int kExitError = 2;

const std::set<std::string> kPathFlags = {"--dataset", "--names",       "--model",    "--lexicon",
                                          "--config",  "--truth",       "--generations", "--out",
                                          "--trace",   "--reward-spec", "--manifest", "--output-dir"};

const std::set<std::string> kArtifactFlags = {"--out", "--trace"};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
  }
  fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// Path-valued flag arguments made absolute, so that a manifest replays from
// any working directory.
std::vector<std::string> absolutize(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  bool in_paths = false;
  for (const auto& a : args) {
    if (a.rfind("-", 0) == 0) {
      in_paths = false;
      const auto eq = a.find('=');
      if (eq != std::string::npos && kPathFlags.count(a.substr(0, eq))) {
        out.push_back(a.substr(0, eq + 1) + fs::absolute(a.substr(eq + 1)).lexically_normal().string());
        continue;
      }
      in_paths = kPathFlags.count(a) > 0;
      out.push_back(a);
    } else if (in_paths) {
      out.push_back(fs::absolute(a).lexically_normal().string());
    } else {
      out.push_back(a);
    }
  }
  return out;
}

class Manifest {
 public:
  Manifest(fs::path file, std::string command, const std::vector<std::string>& args)
      : file_(std::move(file)) {
    data_["command"] = std::move(command);
    data_["args"] = absolutize(args);
    data_["created_at"] = utc_now();
    data_["config"] = json::object();
    data_["artifacts"] = json::array();
  }

  json& config() { return data_["config"]; }
  void add_artifact(const fs::path& path) { data_["artifacts"].push_back(fs::absolute(path).lexically_normal().string()); }

  void write(std::string_view status) {
    data_["status"] = std::string(status);
    if (status != "running") data_["completed_at"] = utc_now();
    write_text_file(file_, data_.dump(2) + "\n");
  }

 private:
  fs::path file_;
  json data_;
};

struct LoadedModel {
  std::unique_ptr<LanguageModel> model;
  json ref;
};

LoadedModel load_model(const std::optional<std::string>& model_path, std::optional<std::string> endpoint, int top_k,
                       int timeout_ms) {
  LoadedModel loaded;
  if (model_path) {
    loaded.model = std::make_unique<NGramModel>(NGramModel::load(*model_path));
    loaded.ref = {{"kind", "ngram"}, {"path", fs::absolute(*model_path).lexically_normal().string()}};
    return loaded;
  }
  if (!endpoint) {
    if (const char* env = std::getenv(kEndpointEnv); env && *env) endpoint = env;
  }
  if (!endpoint) throw UsageError(std::string("--model or --endpoint (or ") + kEndpointEnv + ") is required");
  RemoteEndpoint ep{*endpoint, std::chrono::milliseconds(timeout_ms)};
  loaded.model = std::make_unique<RemoteModel>(ep, top_k);
  loaded.ref = {{"kind", "remote"}, {"url", *endpoint}, {"top_k", top_k}, {"timeout_ms", timeout_ms}};
  return loaded;
}

std::vector<Recipe> read_names(const fs::path& path) {
  std::vector<Recipe> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Recipe r;
    r.name = normalize_whitespace(line);
    if (r.name.empty()) continue;
    try {
      r.validate(Section::kName);
    } catch (const RecipeError& e) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

Dataset read_dataset(const fs::path& path, std::ostream& err) {
  Dataset d = load_dataset(path, CleaningRules{});
  for (const auto& w : d.report.warnings) err << "warning: " << w << "\n";
  return d;
}

json cleaning_json(const CleaningReport& r) {
  return {{"total", r.total},
          {"retained", r.retained},
          {"dropped_empty_or_short", r.dropped_empty_or_short},
          {"dropped_advertisement", r.dropped_advertisement},
          {"dropped_malformed", r.dropped_malformed}};
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

const std::set<std::string> kConfigKeys = {"iterations", "exploration_c", "expansion_k", "nucleus_p",
                                           "rollout_t",  "max_tokens",    "rng_seed",    "stop_tag",
                                           "repetition_theta", "no_repeat_ngram", "reward"};

// ---------------------------------------------------------------- commands

struct TrainOptions {
  std::string dataset;
  int order = 3;
  std::string weights;
  std::string out;
};

int cmd_train_lm(const TrainOptions& opt, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  Manifest manifest(manifest_path(opt.out), "train-lm", args);
  std::vector<double> weights = NGramModel::default_weights(opt.order);
  if (!opt.weights.empty()) {
    weights.clear();
    std::istringstream in(opt.weights);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        weights.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw UsageError("--weights: not a number: \"" + item + "\"");
      }
    }
  }
  manifest.config() = {{"dataset", fs::absolute(opt.dataset).lexically_normal().string()},
                       {"order", opt.order},
                       {"weights", weights},
                       {"floor", NGramModel::kDefaultFloor}};
  manifest.add_artifact(opt.out);
  manifest.write("running");

  const Dataset dataset = read_dataset(opt.dataset, err);
  std::vector<std::string> corpus;
  corpus.reserve(dataset.recipes.size());
  for (const auto& r : dataset.recipes) corpus.push_back(serialize_recipe(r, Section::kInstructions));
  const NGramModel model = NGramModel::train(corpus, opt.order, weights);
  model.save(opt.out);

  manifest.config()["cleaning"] = cleaning_json(dataset.report);
  manifest.write("completed");
  out << "trained order-" << opt.order << " model on " << corpus.size() << " recipes, vocabulary "
      << model.vocabulary().size() << " -> " << opt.out << "\n";
  return kExitOk;
}

struct LexiconOptions {
  std::string dataset;
  std::string out;
};

int cmd_build_lexicon(const LexiconOptions& opt, const std::vector<std::string>& args, std::ostream& out,
                      std::ostream& err) {
  Manifest manifest(manifest_path(opt.out), "build-lexicon", args);
  manifest.config() = {{"dataset", fs::absolute(opt.dataset).lexically_normal().string()}};
  manifest.add_artifact(opt.out);
  manifest.write("running");

  const Dataset dataset = read_dataset(opt.dataset, err);
  LexiconBuildStats stats;
  const ConstituentLexicon lexicon = build_lexicon(dataset.recipes, default_stop_words(), &stats);
  lexicon.save(opt.out);
  if (lexicon.empty()) err << "warning: no constituents extracted; lexicon is empty\n";

  const json stats_json = {{"entries", lexicon.size()},
                           {"candidates", stats.candidates},
                           {"dropped_non_alphabetic", stats.dropped_non_alphabetic},
                           {"dropped_stop_word", stats.dropped_stop_word},
                           {"dropped_decomposable", stats.dropped_decomposable}};
  manifest.config()["stats"] = stats_json;
  manifest.config()["cleaning"] = cleaning_json(dataset.report);
  manifest.write("completed");
  out << stats_json.dump() << "\n";
  return kExitOk;
}

struct GenerateOptions {
  std::string task = "ingredients";
  std::string method = "top_p";
  std::optional<std::string> model;
  std::optional<std::string> endpoint;
  int timeout_ms = 10000;
  std::optional<std::string> dataset;
  std::optional<std::string> names;
  std::optional<std::string> lexicon;
  std::optional<std::string> reward_spec;
  std::optional<std::string> config;
  std::optional<std::size_t> limit;
  int jobs = 1;
  std::string out;
  std::optional<std::string> trace;

  std::optional<int> iterations;
  std::optional<double> exploration_c;
  std::optional<int> expansion_k;
  std::optional<double> nucleus_p;
  std::optional<int> rollout_t;
  std::optional<int> max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<double> repetition_theta;
  std::optional<int> no_repeat_ngram;
};

int cmd_generate(const GenerateOptions& opt, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  GenerateRequest request;
  try {
    request.task = parse_task(opt.task);
    request.method = parse_method(opt.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (opt.dataset.has_value() == opt.names.has_value()) throw UsageError("exactly one of --dataset or --names is required");
  if (opt.names && request.task != TaskKind::kIngredientsFromName) {
    throw UsageError("--names only supplies names; the instructions task needs --dataset");
  }
  if (opt.jobs < 1) throw UsageError("--jobs must be >= 1");

  // Defaults, then the config file, then explicit flags.
  GenerationConfig& cfg = request.config;
  json reward_json;
  if (opt.config) {
    const json file = read_json_file(*opt.config);
    if (!file.is_object()) throw ConfigError(*opt.config + ": expected a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!kConfigKeys.count(key)) throw ConfigError(*opt.config + ": unknown key \"" + key + "\"");
    }
    cfg.merge_json(file);
    if (file.contains("reward")) reward_json = file["reward"];
  }
  if (opt.iterations) cfg.iterations = *opt.iterations;
  if (opt.exploration_c) cfg.exploration_c = *opt.exploration_c;
  if (opt.expansion_k) cfg.expansion_k = *opt.expansion_k;
  if (opt.nucleus_p) cfg.nucleus_p = *opt.nucleus_p;
  if (opt.rollout_t) cfg.rollout_t = *opt.rollout_t;
  if (opt.max_tokens) cfg.max_tokens = *opt.max_tokens;
  if (opt.seed) cfg.rng_seed = *opt.seed;
  if (opt.repetition_theta) cfg.repetition_theta = *opt.repetition_theta;
  if (opt.no_repeat_ngram) cfg.no_repeat_ngram = *opt.no_repeat_ngram;
  cfg.stop_tag = std::string(task_stop_tag(request.task));
  cfg.validate();
  if (opt.reward_spec) reward_json = read_json_file(*opt.reward_spec);

  std::shared_ptr<const ConstituentLexicon> lexicon;
  if (opt.lexicon) lexicon = std::make_shared<const ConstituentLexicon>(ConstituentLexicon::load(*opt.lexicon));
  if (request.method == SamplingMethod::kMcts) {
    if (!lexicon) throw UsageError("--lexicon is required for --method mcts");
    auto spec = reward_json.is_null() ? RewardSpec::defaults(request.task, lexicon)
                                      : RewardSpec::from_json(reward_json, lexicon);
    if (spec.task() != request.task) throw ConfigError("reward spec task does not match --task");
    request.reward = std::make_shared<const RewardSpec>(std::move(spec));
  }
  request.jobs = opt.jobs;
  request.trace = opt.trace.has_value();

  Manifest manifest(manifest_path(opt.out), "generate", args);
  LoadedModel model = load_model(opt.model, opt.endpoint, cfg.expansion_k, opt.timeout_ms);
  json inputs = json::object();
  if (opt.dataset) inputs["dataset"] = fs::absolute(*opt.dataset).lexically_normal().string();
  if (opt.names) inputs["names"] = fs::absolute(*opt.names).lexically_normal().string();
  if (opt.lexicon) inputs["lexicon"] = fs::absolute(*opt.lexicon).lexically_normal().string();
  manifest.config() = {{"task", std::string(task_name(request.task))},
                       {"method", std::string(method_name(request.method))},
                       {"generation", cfg.to_json()},
                       {"master_seed", cfg.rng_seed},
                       {"seed_derivation", "derive_seed(master_seed, index)"},
                       {"reward", request.reward ? request.reward->to_json() : json(nullptr)},
                       {"model", model.ref},
                       {"inputs", inputs},
                       {"limit", opt.limit ? json(*opt.limit) : json(nullptr)},
                       {"jobs", opt.jobs}};
  manifest.add_artifact(opt.out);
  if (opt.trace) manifest.add_artifact(*opt.trace);
  manifest.write("running");

  std::vector<Recipe> inputs_list = opt.dataset ? read_dataset(*opt.dataset, err).recipes : read_names(*opt.names);
  if (opt.limit && inputs_list.size() > *opt.limit) inputs_list.resize(*opt.limit);
  if (inputs_list.empty()) err << "warning: no prompts to generate from\n";

  const auto samples = generate_samples(*model.model, inputs_list, request);

  std::string lines;
  std::string trace_lines;
  std::size_t failures = 0;
  for (const auto& s : samples) {
    lines += sample_json(s, request.method).dump() + "\n";
    for (const auto& t : s.trace) trace_lines += t.dump() + "\n";
    if (s.error) {
      ++failures;
      err << "sample " << s.index << " (" << s.name << "): " << *s.error << "\n";
    }
  }
  write_text_file(opt.out, lines);
  if (opt.trace) write_text_file(*opt.trace, trace_lines);

  manifest.config()["failures"] = failures;
  manifest.write(failures ? "completed_with_failures" : "completed");
  out << samples.size() - failures << "/" << samples.size() << " samples generated with "
      << method_name(request.method) << " -> " << opt.out << "\n";
  return failures ? kExitSampleFailures : kExitOk;
}

struct EvaluateOptions {
  std::string task = "ingredients";
  std::string truth;
  std::vector<std::string> generations;
  std::string methods = "top_p,no_ngram,rep_penalty,mcts";
  std::optional<std::string> model;
  std::string lexicon;
  std::optional<std::size_t> limit;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = normalize_whitespace(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_evaluate(const EvaluateOptions& opt, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  TaskKind task;
  try {
    task = parse_task(opt.task);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto required = split_list(opt.methods);
  if (required.empty()) throw UsageError("--methods must name at least one method");
  for (const auto& m : required) {
    try {
      parse_method(m);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  const fs::path json_path = opt.out + ".json";
  const fs::path csv_path = opt.out + ".csv";
  Manifest manifest(manifest_path(opt.out), "evaluate", args);
  std::vector<std::string> generation_paths;
  for (const auto& g : opt.generations) generation_paths.push_back(fs::absolute(g).lexically_normal().string());
  manifest.config() = {{"task", std::string(task_name(task))},
                       {"truth", fs::absolute(opt.truth).lexically_normal().string()},
                       {"generations", generation_paths},
                       {"methods", required},
                       {"lexicon", fs::absolute(opt.lexicon).lexically_normal().string()},
                       {"model", opt.model ? json(fs::absolute(*opt.model).lexically_normal().string()) : json(nullptr)},
                       {"limit", opt.limit ? json(*opt.limit) : json(nullptr)}};
  manifest.add_artifact(json_path);
  manifest.add_artifact(csv_path);
  manifest.write("running");

  std::vector<Recipe> truth = read_dataset(opt.truth, err).recipes;
  if (opt.limit && truth.size() > *opt.limit) truth.resize(*opt.limit);

  std::map<std::string, MethodOutputs> by_method;
  for (const auto& path : opt.generations) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::optional<std::string> method;
    std::vector<std::optional<std::string>> outputs(truth.size());
    std::vector<std::size_t> failed;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (normalize_whitespace(line).empty()) continue;
      const std::string where = path + ":" + std::to_string(line_no);
      json row;
      try {
        row = json::parse(line);
      } catch (const json::parse_error& e) {
        throw EvaluationError(where + ": invalid JSON: " + e.what());
      }
      const auto m = row.value("method", std::string());
      if (method && *method != m) throw EvaluationError(where + ": mixed methods in one file");
      method = m;
      const auto index = row.value("index", truth.size());
      if (opt.limit && index >= truth.size()) continue;
      if (index >= truth.size()) {
        throw EvaluationError(where + ": sample index " + std::to_string(index) + " has no ground-truth recipe");
      }
      if (row.value("name", std::string()) != truth[index].name) {
        throw EvaluationError(where + ": name does not match ground-truth recipe " + std::to_string(index));
      }
      if (outputs[index]) throw EvaluationError(where + ": duplicate sample index " + std::to_string(index));
      if (row.contains("error") || !row["output"].is_string()) {
        failed.push_back(index);
        outputs[index] = std::string();
        continue;
      }
      outputs[index] = row["output"].get<std::string>();
    }
    if (!method) throw EvaluationError(path + ": no samples");
    if (!failed.empty()) {
      throw EvaluationError(path + ": " + std::to_string(failed.size()) + " failed samples (first index " +
                            std::to_string(failed.front()) + ")");
    }
    MethodOutputs mo{*method, {}};
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (!outputs[i]) throw EvaluationError(path + ": missing sample " + std::to_string(i));
      mo.outputs.push_back(*outputs[i]);
    }
    if (by_method.count(*method)) throw EvaluationError("two generations files for method " + *method);
    by_method.emplace(*method, std::move(mo));
  }

  std::vector<std::string> missing;
  for (const auto& m : required) {
    if (!by_method.count(m)) missing.push_back(m);
  }
  if (!missing.empty()) throw EvaluationError("missing generations for method(s): " + join(missing, ", "));
  std::vector<MethodOutputs> ordered;
  for (const auto& m : required) ordered.push_back(by_method.at(m));

  const ConstituentLexicon lexicon = ConstituentLexicon::load(opt.lexicon);
  std::unique_ptr<NGramModel> model;
  if (opt.model) model = std::make_unique<NGramModel>(NGramModel::load(*opt.model));

  const EvaluationReport report = evaluate_all(task, truth, ordered, model.get(), lexicon);
  write_text_file(json_path, report.to_json().dump(2) + "\n");
  write_text_file(csv_path, report.to_csv());
  manifest.write("completed");
  out << report.to_csv();
  return kExitOk;
}

struct ReplayOptions {
  std::string manifest;
  std::optional<std::string> output_dir;
};

int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream& err) {
  const json manifest = read_json_file(opt.manifest);
  if (!manifest.contains("args") || !manifest["args"].is_array()) {
    throw UsageError(opt.manifest + ": not a run manifest");
  }
  auto args = manifest["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") throw UsageError(opt.manifest + ": nothing to replay");
  if (opt.output_dir) {
    bool redirect = false;
    for (auto& a : args) {
      if (a.rfind("-", 0) == 0) {
        redirect = kArtifactFlags.count(a) > 0;
      } else if (redirect) {
        a = (fs::path(*opt.output_dir) / fs::path(a).filename()).string();
      }
    }
  }
  return run(args, out, err);
}

}  // namespace

fs::path manifest_path(const fs::path& artifact) { return artifact.string() + ".manifest.json"; }

std::vector<SampleOutcome> generate_samples(const LanguageModel& model, const std::vector<Recipe>& inputs,
                                            const GenerateRequest& request) {
  std::vector<SampleOutcome> results(inputs.size());

  auto work = [&](std::size_t i) {
    SampleOutcome s;
    s.index = i;
    s.name = inputs[i].name;
    s.seed = derive_seed(request.config.rng_seed, i);
    try {
      s.prompt = task_prompt(inputs[i], request.task);
      GenerationConfig cfg = request.config;
      cfg.rng_seed = s.seed;
      cfg.stop_tag = std::string(task_stop_tag(request.task));
      const auto prompt_tokens = model.encode(s.prompt);
      GenerationResult result;
      if (request.method == SamplingMethod::kMcts) {
        if (!request.reward) throw ConfigError("MCTS needs a reward spec");
        const auto reward = request.reward;
        MctsGenerator generator(model, [reward](std::string_view text) { return reward->combine(text); }, cfg);
        if (request.trace) {
          generator.set_trace_sink([&](const IterationTrace& t, const SearchNode& root) {
            std::vector<std::string> path;
            for (TokenId id : t.path) path.push_back(model.decode(std::span<const TokenId>(&id, 1)));
            s.trace.push_back({{"sample", i},
                               {"step", t.step},
                               {"iteration", t.iteration},
                               {"path", path},
                               {"rollout_tokens", t.rollout_tokens},
                               {"reward", t.reward},
                               {"root_visits", root.visits}});
          });
        }
        result = generator.generate(prompt_tokens);
      } else {
        result = sample_sequence(model, prompt_tokens, request.method, cfg);
      }
      s.output = model.decode(result.tokens);
      s.stopped = result.stopped;
    } catch (const std::exception& e) {
      s.error = e.what();
      s.output.clear();
      s.trace.clear();
    }
    results[i] = std::move(s);
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(request.jobs, 1)), inputs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) work(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < inputs.size(); i = next++) work(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

nlohmann::json sample_json(const SampleOutcome& sample, SamplingMethod method) {
  json row = {{"index", sample.index},
              {"name", sample.name},
              {"prompt", sample.prompt},
              {"output", sample.error ? json(nullptr) : json(sample.output)},
              {"method", std::string(method_name(method))},
              {"seed", sample.seed},
              {"stopped", sample.stopped}};
  if (sample.error) row["error"] = *sample.error;
  return row;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recipe generation with Monte Carlo tree search decoding", "recipemc"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train-lm", "Train the built-in n-gram model on a dataset");
  train_cmd->add_option("--dataset", train.dataset, "Tab-separated recipe dataset")->required();
  train_cmd->add_option("--order", train.order, "n-gram order")->check(CLI::Range(1, 8));
  train_cmd->add_option("--weights", train.weights, "Interpolation weights, highest order first, comma-separated");
  train_cmd->add_option("--out", train.out, "Model file to write")->required();

  LexiconOptions lex;
  auto* lex_cmd = app.add_subcommand("build-lexicon", "Extract the constituent lexicon from a dataset");
  lex_cmd->add_option("--dataset", lex.dataset, "Tab-separated recipe dataset")->required();
  lex_cmd->add_option("--out", lex.out, "Lexicon file to write")->required();

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a recipe section for each prompt");
  gen_cmd->add_option("--task", gen.task, "ingredients or instructions");
  gen_cmd->add_option("--method", gen.method, "top_p, no_ngram, rep_penalty or mcts");
  gen_cmd->add_option("--model", gen.model, "n-gram model file");
  gen_cmd->add_option("--endpoint", gen.endpoint, std::string("Remote model URL (default: $") + kEndpointEnv + ")");
  gen_cmd->add_option("--timeout-ms", gen.timeout_ms, "Remote request timeout");
  gen_cmd->add_option("--dataset", gen.dataset, "Dataset supplying the prompts");
  gen_cmd->add_option("--names", gen.names, "File with one recipe name per line");
  gen_cmd->add_option("--lexicon", gen.lexicon, "Constituent lexicon (required for mcts)");
  gen_cmd->add_option("--reward-spec", gen.reward_spec, "Reward spec JSON");
  gen_cmd->add_option("--config", gen.config, "Generation config JSON; explicit flags override it");
  gen_cmd->add_option("--limit", gen.limit, "Use only the first N prompts");
  gen_cmd->add_option("--jobs", gen.jobs, "Samples generated concurrently");
  gen_cmd->add_option("--out", gen.out, "Generations file (JSON lines)")->required();
  gen_cmd->add_option("--trace", gen.trace, "Write per-iteration MCTS trace (JSON lines)");
  gen_cmd->add_option("--iterations", gen.iterations, "MCTS iterations per token");
  gen_cmd->add_option("--exploration-c", gen.exploration_c, "PUCB exploration weight");
  gen_cmd->add_option("--expansion-k", gen.expansion_k, "Children per expansion");
  gen_cmd->add_option("--nucleus-p", gen.nucleus_p, "Top-p mass");
  gen_cmd->add_option("--rollout-t", gen.rollout_t, "Rollout length in tokens");
  gen_cmd->add_option("--max-tokens", gen.max_tokens, "Generated token cap");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--repetition-theta", gen.repetition_theta, "Repetition penalty");
  gen_cmd->add_option("--no-repeat-ngram", gen.no_repeat_ngram, "Blocked n-gram size");

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score generations against ground truth");
  eval_cmd->add_option("--task", eval.task, "ingredients or instructions");
  eval_cmd->add_option("--truth", eval.truth, "Ground-truth dataset")->required();
  eval_cmd->add_option("--generations", eval.generations, "Generations files, one per method")
      ->required()
      ->allow_extra_args(false);
  eval_cmd->add_option("--methods", eval.methods, "Methods that must be present, comma-separated");
  eval_cmd->add_option("--model", eval.model, "n-gram model for perplexity");
  eval_cmd->add_option("--lexicon", eval.lexicon, "Constituent lexicon")->required();
  eval_cmd->add_option("--limit", eval.limit, "Use only the first N ground-truth recipes");
  eval_cmd->add_option("--out", eval.out, "Report prefix; writes <prefix>.json and <prefix>.csv")->required();

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("--manifest", replay.manifest, "Run manifest")->required();
  replay_cmd->add_option("--output-dir", replay.output_dir, "Write artifacts here instead of the original paths");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*train_cmd) return cmd_train_lm(train, args, out, err);
    if (*lex_cmd) return cmd_build_lexicon(lex, args, out, err);
    if (*gen_cmd) return cmd_generate(gen, args, out, err);
    if (*eval_cmd) return cmd_evaluate(eval, args, out, err);
    if (*replay_cmd) return cmd_replay(replay, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace recipemc::cli
