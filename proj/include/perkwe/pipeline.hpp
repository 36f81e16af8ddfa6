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

#ifndef PERKWE_PIPELINE_HPP_
#define PERKWE_PIPELINE_HPP_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "perkwe/conversation.hpp"
#include "perkwe/gateway.hpp"
#include "perkwe/keywords.hpp"
#include "perkwe/metrics.hpp"
#include "perkwe/prompt.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

struct BackendSpec {
  std::string kind = "echo_gold";  // echo_gold | canned | fixed | remote
  GenerationParams params;
  RemoteConfig remote;
  std::string canned_file;         // kind == canned
  std::string fixed_answer;        // kind == fixed
};

struct PromptConfig {
  std::size_t budget = 6000;
  std::string instruction = std::string(kDefaultInstruction);
  std::string template_file;       // empty: the standard layout
  std::vector<Slot> slots;         // empty: the standard order
};

struct PipelineConfig {
  RankConfig rank;
  std::size_t max_history = 5;
  PromptConfig prompt;
  BackendSpec backend;
  HistoryMode history_mode = HistoryMode::kTeacherForced;
  std::string stoplist = "builtin";
  MetricOptions metrics;
  TableOptions table;

  // Unknown keys or invalid values throw ConfigError naming the key path.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;

  PromptTemplate prompt_template() const;
};

// Builds the backend described by `spec`. echo_gold needs the dataset.
std::shared_ptr<Backend> make_backend(const BackendSpec& spec, const Dataset* dataset = nullptr);

struct TurnTrace {
  std::string conversation_id;
  std::size_t turn_index = 0;
  std::string question;
  std::string keyword_source;  // "history" or "document"
  std::vector<KeywordScore> extracted_keywords;
  Prompt prompt;
  std::string raw_model_output;
  std::string final_answer;
  bool truncated_output = false;
  std::chrono::microseconds latency{0};
  std::optional<std::string> error;  // set when generation failed

  // Without latency, so traces of deterministic runs compare byte-equal.
  nlohmann::json to_json() const;
};

// Shared state for one pipeline configuration: the resolved template and
// stop list plus the backend handle. Immutable after construction.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend);

  const PipelineConfig& config() const noexcept { return config_; }
  const StopList& stops() const noexcept { return stops_; }
  const PromptTemplate& prompt_template() const noexcept { return template_; }
  Backend& backend() const noexcept { return *backend_; }

  // Keywords come from the history questions and answers, or from the
  // document text when there is no history. Gateway errors propagate.
  TurnTrace answer(std::string_view document_text, const HistoryView& history,
                   std::string_view question, std::optional<TurnKey> turn = std::nullopt) const;

  // One dataset turn. In self-predicted mode `predicted` supplies the
  // answers of earlier turns.
  TurnTrace run_turn(const Conversation& conversation, std::size_t turn_index,
                     const std::map<std::size_t, std::string>& predicted = {}) const;

 private:
  PipelineConfig config_;
  std::shared_ptr<Backend> backend_;
  StopList stops_;
  PromptTemplate template_;
};

struct EvalInstance {
  TurnTrace trace;
  std::vector<std::string> gold_answers;
  InstanceScores scores;
};

struct EvalResult {
  MetricReport report;
  std::vector<EvalInstance> instances;  // dataset order
  nlohmann::json effective_config;

  // {"conversation_id", "turn_index", "prediction"} per line.
  std::string predictions_jsonl() const;
  // Per-instance scores, keywords and prompt accounting, one JSON per line.
  std::string instances_jsonl() const;
  nlohmann::json report_json() const;
  std::string report_table(const TableOptions& options) const;
};

// Runs every turn of every conversation and scores the answers. Turn-level
// failures are recorded on the trace and scored as an empty prediction.
// Conversations run on up to `parallelism` threads; results are in dataset
// order either way.
EvalResult run_eval(const Dataset& dataset, const Pipeline& pipeline, int parallelism = 1);

// Scores externally produced predictions ({"conversation_id", "turn_index",
// "prediction"} JSONL). Missing predictions score as empty answers.
EvalResult score_predictions(const Dataset& dataset, std::string_view predictions_jsonl,
                             const MetricOptions& options = {});

// Writes predictions.jsonl, instances.jsonl, report.json and report.txt.
void write_eval_outputs(const EvalResult& result, const std::filesystem::path& out_dir,
                        const TableOptions& options, const nlohmann::json& run_info);

}  // namespace perkwe

#endif  // PERKWE_PIPELINE_HPP_
