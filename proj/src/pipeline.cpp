// Copyright 2026 The PerkwE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "perkwe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "perkwe/errors.hpp"

namespace perkwe {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  // Call after the last read.
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown config key");
    }
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->get<long long>() < 0) throw ConfigError("must not be negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("expected a number");
      } else {
        if (!v->is_string()) throw ConfigError("expected a string");
      }
      out = v->get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(child(key) + ": " + e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_ms(ObjectReader& r, const std::string& key, std::chrono::milliseconds& out) {
  long long ms = out.count();
  r.read(key, ms);
  out = std::chrono::milliseconds(ms);
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig cfg;
  {
    ObjectReader root(j, "$");
    if (const json* rank = root.get("rank")) {
      ObjectReader r(*rank, root.child("rank"));
      r.read("damping", cfg.rank.damping);
      r.read("tolerance", cfg.rank.tolerance);
      r.read("max_iterations", cfg.rank.max_iterations);
      r.read("window", cfg.rank.window);
      r.read("top_k", cfg.rank.top_k);
      r.read("min_term_length", cfg.rank.min_term_length);
      r.read("merge_phrases", cfg.rank.merge_phrases);
      r.done();
    }
    root.read("max_history", cfg.max_history);
    if (const json* prompt = root.get("prompt")) {
      ObjectReader r(*prompt, root.child("prompt"));
      r.read("budget", cfg.prompt.budget);
      r.read("instruction", cfg.prompt.instruction);
      r.read("template_file", cfg.prompt.template_file);
      if (const json* slots = r.get("slots")) {
        if (!slots->is_array()) throw ConfigError(r.child("slots") + ": expected an array");
        for (const auto& s : *slots) {
          if (!s.is_string()) throw ConfigError(r.child("slots") + ": expected slot names");
          cfg.prompt.slots.push_back(slot_from_string(s.get<std::string>()));
        }
      }
      r.done();
    }
    if (const json* backend = root.get("backend")) {
      ObjectReader r(*backend, root.child("backend"));
      r.read("kind", cfg.backend.kind);
      r.read("model", cfg.backend.params.model_id);
      r.read("temperature", cfg.backend.params.temperature);
      r.read("max_output_chars", cfg.backend.params.max_output_chars);
      read_ms(r, "timeout_ms", cfg.backend.params.timeout);
      r.read("retries", cfg.backend.params.retries);
      read_ms(r, "backoff_ms", cfg.backend.params.backoff);
      r.read("base_url", cfg.backend.remote.base_url);
      r.read("api_key_env", cfg.backend.remote.api_key_env);
      r.read("max_concurrency", cfg.backend.remote.max_concurrency);
      r.read("canned_file", cfg.backend.canned_file);
      r.read("fixed_answer", cfg.backend.fixed_answer);
      r.done();
    }
    std::string mode(to_string(cfg.history_mode));
    root.read("history_mode", mode);
    cfg.history_mode = history_mode_from_string(mode);
    root.read("stoplist", cfg.stoplist);
    if (const json* metrics = root.get("metrics")) {
      ObjectReader r(*metrics, root.child("metrics"));
      r.read("rouge_su_max_skip", cfg.metrics.rouge_su_max_skip);
      r.done();
    }
    if (const json* report = root.get("report")) {
      ObjectReader r(*report, root.child("report"));
      r.read("model_name", cfg.table.model_name);
      r.read("bleu_order", cfg.table.bleu_order);
      r.read("rouge_breakdown", cfg.table.rouge_breakdown);
      r.read("bleu_breakdown", cfg.table.bleu_breakdown);
      r.read("bleu_per_order", cfg.table.bleu_per_order);
      r.done();
    }
    root.done();
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  return from_json(j);
}

json PipelineConfig::to_json() const {
  json slot_names = json::array();
  for (Slot s : prompt.slots) slot_names.push_back(std::string(to_string(s)));
  return {
      {"rank",
       {{"damping", rank.damping},
        {"tolerance", rank.tolerance},
        {"max_iterations", rank.max_iterations},
        {"window", rank.window},
        {"top_k", rank.top_k},
        {"min_term_length", rank.min_term_length},
        {"merge_phrases", rank.merge_phrases}}},
      {"max_history", max_history},
      {"prompt",
       {{"budget", prompt.budget},
        {"instruction", prompt.instruction},
        {"template_file", prompt.template_file},
        {"slots", slot_names}}},
      {"backend",
       {{"kind", backend.kind},
        {"model", backend.params.model_id},
        {"temperature", backend.params.temperature},
        {"max_output_chars", backend.params.max_output_chars},
        {"timeout_ms", backend.params.timeout.count()},
        {"retries", backend.params.retries},
        {"backoff_ms", backend.params.backoff.count()},
        {"base_url", backend.remote.base_url},
        {"api_key_env", backend.remote.api_key_env},
        {"max_concurrency", backend.remote.max_concurrency},
        {"canned_file", backend.canned_file},
        {"fixed_answer", backend.fixed_answer}}},
      {"history_mode", std::string(perkwe::to_string(history_mode))},
      {"stoplist", stoplist},
      {"metrics", {{"rouge_su_max_skip", metrics.rouge_su_max_skip}}},
      {"report",
       {{"model_name", table.model_name},
        {"bleu_order", table.bleu_order},
        {"rouge_breakdown", table.rouge_breakdown},
        {"bleu_breakdown", table.bleu_breakdown},
        {"bleu_per_order", table.bleu_per_order}}},
  };
}

void PipelineConfig::validate() const {
  rank.validate();
  if (prompt.budget < 1) throw ConfigError("prompt.budget must be positive");
  static const std::set<std::string> kKinds = {"echo_gold", "canned", "fixed", "remote"};
  if (!kKinds.count(backend.kind)) {
    throw ConfigError("backend.kind must be one of echo_gold, canned, fixed, remote");
  }
  if (backend.params.temperature < 0.0) throw ConfigError("backend.temperature must be >= 0");
  if (backend.params.max_output_chars < 1) throw ConfigError("backend.max_output_chars must be positive");
  if (backend.params.timeout.count() <= 0) throw ConfigError("backend.timeout_ms must be positive");
  if (backend.params.retries < 0) throw ConfigError("backend.retries must be >= 0");
  if (backend.params.backoff.count() < 0) throw ConfigError("backend.backoff_ms must be >= 0");
  if (backend.remote.max_concurrency < 1) throw ConfigError("backend.max_concurrency must be >= 1");
  if (backend.kind == "canned" && backend.canned_file.empty()) {
    throw ConfigError("backend.canned_file is required for the canned backend");
  }
  if (metrics.rouge_su_max_skip < 0) throw ConfigError("metrics.rouge_su_max_skip must be >= 0");
  if (table.bleu_order < 1 || table.bleu_order > kMaxBleuOrder) {
    throw ConfigError("report.bleu_order must lie in 1..4");
  }
  prompt_template();
}

PromptTemplate PipelineConfig::prompt_template() const {
  PromptTemplate t = prompt.template_file.empty()
                         ? PromptTemplate::standard()
                         : PromptTemplate::from_file(prompt.template_file, prompt.instruction);
  t.instruction_text = prompt.instruction;
  if (!prompt.slots.empty()) {
    t.slots = prompt.slots;
    t.validate();
  }
  return t;
}

std::shared_ptr<Backend> make_backend(const BackendSpec& spec, const Dataset* dataset) {
  if (spec.kind == "echo_gold") {
    if (!dataset) throw ConfigError("the echo_gold backend needs a dataset");
    return EchoGoldBackend::from_dataset(*dataset);
  }
  if (spec.kind == "canned") return CannedBackend::from_file(spec.canned_file);
  if (spec.kind == "fixed") return CannedBackend::fixed(spec.fixed_answer);
  if (spec.kind == "remote") return std::make_shared<RemoteBackend>(spec.remote);
  throw ConfigError("unknown backend kind \"" + spec.kind + "\"");
}

json TurnTrace::to_json() const {
  json keywords = json::array();
  for (const auto& k : extracted_keywords) {
    keywords.push_back({{"term", k.term}, {"score", k.score}, {"rank", k.rank}});
  }
  json dropped = json::array();
  for (const auto& d : prompt.dropped) {
    dropped.push_back({{"slot", std::string(perkwe::to_string(d.slot))}, {"reason", d.reason}});
  }
  json j = {{"conversation_id", conversation_id},
            {"turn_index", turn_index},
            {"question", question},
            {"keyword_source", keyword_source},
            {"keywords", std::move(keywords)},
            {"prompt",
             {{"rendered", prompt.rendered},
              {"characters", codepoint_length(prompt.rendered)},
              {"budget", prompt.budget},
              {"keywords_included", prompt.keywords.size()},
              {"history_included", prompt.history_entries},
              {"dropped", std::move(dropped)}}},
            {"raw_model_output", raw_model_output},
            {"final_answer", final_answer},
            {"truncated_output", truncated_output}};
  if (error) j["error"] = *error;
  return j;
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  config_.validate();
  if (!backend_) throw ConfigError("pipeline needs a backend");
  stops_ = StopList::load(config_.stoplist);
  template_ = config_.prompt_template();
}

TurnTrace Pipeline::answer(std::string_view document_text, const HistoryView& history,
                           std::string_view question, std::optional<TurnKey> turn) const {
  TurnTrace trace;
  if (turn) {
    trace.conversation_id = turn->conversation_id;
    trace.turn_index = turn->turn_index;
  }
  trace.question = std::string(question);

  if (history.entries.empty()) {
    trace.keyword_source = "document";
    trace.extracted_keywords = extract_keywords(document_text, config_.rank, stops_);
  } else {
    std::string source;
    for (const auto& entry : history.entries) {
      source += entry.question;
      source += '\n';
      source += entry.answer;
      source += '\n';
    }
    trace.keyword_source = "history";
    trace.extracted_keywords = extract_keywords(source, config_.rank, stops_);
  }

  trace.prompt = assemble_prompt(document_text, history, trace.extracted_keywords, question,
                                 template_, config_.prompt.budget);
  const GenerationResult result =
      backend_->generate(GenerationRequest{trace.prompt, std::move(turn)}, config_.backend.params);
  trace.raw_model_output = result.text;
  trace.truncated_output = result.truncated;
  trace.latency = result.latency;
  trace.final_answer = canonicalize_answer(result.text);
  return trace;
}

TurnTrace Pipeline::run_turn(const Conversation& conversation, std::size_t turn_index,
                             const std::map<std::size_t, std::string>& predicted) const {
  const HistoryView history = history_window(conversation, turn_index, config_.max_history,
                                             config_.history_mode, predicted);
  return answer(conversation.document.text, history, conversation.turns[turn_index].question,
                TurnKey{conversation.id, turn_index});
}

namespace {

std::vector<EvalInstance> eval_conversation(const Conversation& conv, const Pipeline& pipeline,
                                            const MetricOptions& metric_options) {
  std::vector<EvalInstance> out;
  std::map<std::size_t, std::string> predicted;
  for (std::size_t t = 0; t < conv.turns.size(); ++t) {
    EvalInstance inst;
    inst.gold_answers = conv.turns[t].gold_answers;
    try {
      inst.trace = pipeline.run_turn(conv, t, predicted);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      inst.trace = TurnTrace{};
      inst.trace.conversation_id = conv.id;
      inst.trace.turn_index = t;
      inst.trace.question = conv.turns[t].question;
      inst.trace.error = e.what();
    }
    predicted[t] = inst.trace.final_answer;
    inst.scores = score_instance(inst.trace.final_answer, inst.gold_answers, metric_options);
    out.push_back(std::move(inst));
  }
  return out;
}

EvalResult finish(std::vector<EvalInstance> instances, json config) {
  EvalResult result;
  std::vector<InstanceScores> scores;
  std::vector<std::string> predictions;
  std::vector<std::vector<std::string>> references;
  for (const auto& inst : instances) {
    scores.push_back(inst.scores);
    predictions.push_back(inst.trace.final_answer);
    references.push_back(inst.gold_answers);
  }
  result.report = aggregate_report(scores);
  result.report.corpus_bleu = bleu(predictions, references);
  result.instances = std::move(instances);
  result.effective_config = std::move(config);
  return result;
}

}  // namespace

EvalResult run_eval(const Dataset& dataset, const Pipeline& pipeline, int parallelism) {
  if (dataset.conversations.empty()) throw ArgumentError("cannot evaluate an empty dataset");
  const auto& convs = dataset.conversations;
  std::vector<std::vector<EvalInstance>> per_conv(convs.size());
  const MetricOptions& metric_options = pipeline.config().metrics;

  const std::size_t workers =
      std::min<std::size_t>(convs.size(), static_cast<std::size_t>(std::max(1, parallelism)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < convs.size(); i = next++) {
      try {
        per_conv[i] = eval_conversation(convs[i], pipeline, metric_options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = convs.size();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<EvalInstance> instances;
  for (auto& conv : per_conv) {
    for (auto& inst : conv) instances.push_back(std::move(inst));
  }
  return finish(std::move(instances), pipeline.config().to_json());
}

EvalResult score_predictions(const Dataset& dataset, std::string_view predictions_jsonl,
                             const MetricOptions& options) {
  if (dataset.conversations.empty()) throw ArgumentError("cannot evaluate an empty dataset");
  std::map<TurnKey, std::string> predictions;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < predictions_jsonl.size()) {
    std::size_t eol = predictions_jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = predictions_jsonl.size();
    const std::string_view line = predictions_jsonl.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "predictions line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(where + ": malformed JSON at byte " + std::to_string(e.byte));
    }
    if (!j.is_object() || !j.contains("conversation_id") || !j["conversation_id"].is_string() ||
        !j.contains("turn_index") || !j["turn_index"].is_number_unsigned() ||
        !j.contains("prediction") || !j["prediction"].is_string()) {
      throw SchemaError(where + ": expected {\"conversation_id\": string, \"turn_index\": "
                                "non-negative integer, \"prediction\": string}");
    }
    predictions[{j["conversation_id"].get<std::string>(), j["turn_index"].get<std::size_t>()}] =
        j["prediction"].get<std::string>();
  }

  std::vector<EvalInstance> instances;
  for (const auto& conv : dataset.conversations) {
    for (const auto& turn : conv.turns) {
      EvalInstance inst;
      inst.gold_answers = turn.gold_answers;
      inst.trace.conversation_id = conv.id;
      inst.trace.turn_index = turn.index;
      inst.trace.question = turn.question;
      auto it = predictions.find({conv.id, turn.index});
      if (it == predictions.end()) {
        inst.trace.error = "no prediction";
      } else {
        inst.trace.raw_model_output = it->second;
        inst.trace.final_answer = it->second;
      }
      inst.scores = score_instance(inst.trace.final_answer, inst.gold_answers, options);
      instances.push_back(std::move(inst));
    }
  }
  return finish(std::move(instances), json{{"metrics", {{"rouge_su_max_skip", options.rouge_su_max_skip}}}});
}

std::string EvalResult::predictions_jsonl() const {
  std::string out;
  for (const auto& inst : instances) {
    out += json{{"conversation_id", inst.trace.conversation_id},
                {"turn_index", inst.trace.turn_index},
                {"prediction", inst.trace.final_answer}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string EvalResult::instances_jsonl() const {
  std::string out;
  for (const auto& inst : instances) {
    json keywords = json::array();
    for (const auto& k : inst.trace.extracted_keywords) {
      keywords.push_back({{"term", k.term}, {"score", k.score}, {"rank", k.rank}});
    }
    json dropped = json::array();
    for (const auto& d : inst.trace.prompt.dropped) {
      dropped.push_back({{"slot", std::string(to_string(d.slot))}, {"reason", d.reason}});
    }
    json j = {{"conversation_id", inst.trace.conversation_id},
              {"turn_index", inst.trace.turn_index},
              {"question", inst.trace.question},
              {"prediction", inst.trace.final_answer},
              {"raw_model_output", inst.trace.raw_model_output},
              {"gold_answers", inst.gold_answers},
              {"gold_unanswerable",
               std::all_of(inst.gold_answers.begin(), inst.gold_answers.end(),
                           [](const std::string& a) { return is_unanswerable(a); })},
              {"keyword_source", inst.trace.keyword_source},
              {"keywords", std::move(keywords)},
              {"prompt_characters", codepoint_length(inst.trace.prompt.rendered)},
              {"prompt_hash", prompt_hash(inst.trace.prompt.rendered)},
              {"dropped", std::move(dropped)},
              {"scores", to_json(inst.scores)}};
    if (inst.trace.error) j["error"] = *inst.trace.error;
    out += j.dump();
    out += '\n';
  }
  return out;
}

json EvalResult::report_json() const {
  std::size_t errors = 0;
  for (const auto& inst : instances) errors += inst.trace.error.has_value();
  return {{"config", effective_config},
          {"metrics", to_json(report)},
          {"turn_errors", errors},
          {"table_columns", {"HM (EM)", "F1", "BLEU", "ROUGE"}}};
}

std::string EvalResult::report_table(const TableOptions& options) const {
  return format_report_table(report, options);
}

void write_eval_outputs(const EvalResult& result, const std::filesystem::path& out_dir,
                        const TableOptions& options, const json& run_info) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + (out_dir / name).string());
    out << content;
  };
  write("predictions.jsonl", result.predictions_jsonl());
  write("instances.jsonl", result.instances_jsonl());
  json report = result.report_json();
  if (!run_info.is_null()) report["run"] = run_info;
  write("report.json", report.dump(2) + "\n");
  write("report.txt", result.report_table(options));
}

}  // namespace perkwe
