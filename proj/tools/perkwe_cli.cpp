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

// perkwe: conversational QA over documents with graph-ranked keywords.
//
//   perkwe normalize <file>
//   perkwe keywords <file> [--top-k N]
//   perkwe ask --dataset <f> --conv <id> --turn <i>
//   perkwe chat --doc <file>
//   perkwe eval --dataset <f> --out <dir> [--predictions <jsonl>]
//   perkwe convert <upstream> <out>
//   perkwe serve --port <p>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "perkwe/conversation.hpp"
#include "perkwe/errors.hpp"
#include "perkwe/keywords.hpp"
#include "perkwe/pipeline.hpp"
#include "perkwe/service.hpp"
#include "perkwe/text.hpp"

namespace {

using nlohmann::json;
using namespace perkwe;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Flags that override config-file values when given.
struct Overrides {
  std::string config_path;
  std::optional<std::string> backend;
  std::optional<std::string> base_url;
  std::optional<std::string> model;
  std::optional<std::string> canned_file;
  std::optional<std::string> fixed_answer;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> window;
  std::optional<double> damping;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> max_history;
  std::optional<std::string> history_mode;
  std::optional<std::string> stoplist;
  std::optional<int> retries;
  std::optional<long long> timeout_ms;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--backend", backend, "echo_gold | canned | fixed | remote");
    app.add_option("--base-url", base_url, "Chat-completions server base URL");
    app.add_option("--model", model, "Remote model id");
    app.add_option("--canned", canned_file, "Canned reply script (JSON)");
    app.add_option("--fixed-answer", fixed_answer, "Reply of the fixed backend");
    app.add_option("--top-k", top_k, "Keywords to keep");
    app.add_option("--window", window, "Co-occurrence window");
    app.add_option("--damping", damping, "PageRank damping factor");
    app.add_option("--budget", budget, "Prompt budget in characters");
    app.add_option("--max-history", max_history, "History turns kept");
    app.add_option("--history-mode", history_mode, "teacher_forced | self_predicted");
    app.add_option("--stoplist", stoplist, "\"builtin\" or a stop-word file");
    app.add_option("--retries", retries, "Remote retries");
    app.add_option("--timeout-ms", timeout_ms, "Remote timeout");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
    if (backend) cfg.backend.kind = *backend;
    if (base_url) cfg.backend.remote.base_url = *base_url;
    if (model) cfg.backend.params.model_id = *model;
    if (canned_file) cfg.backend.canned_file = *canned_file;
    if (fixed_answer) cfg.backend.fixed_answer = *fixed_answer;
    if (top_k) cfg.rank.top_k = *top_k;
    if (window) cfg.rank.window = *window;
    if (damping) cfg.rank.damping = *damping;
    if (budget) cfg.prompt.budget = *budget;
    if (max_history) cfg.max_history = *max_history;
    if (history_mode) cfg.history_mode = history_mode_from_string(*history_mode);
    if (stoplist) cfg.stoplist = *stoplist;
    if (retries) cfg.backend.params.retries = *retries;
    if (timeout_ms) cfg.backend.params.timeout = std::chrono::milliseconds(*timeout_ms);
    cfg.validate();
    return cfg;
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void print_keywords(const std::vector<KeywordScore>& keywords) {
  for (const auto& k : keywords) {
    std::printf("%3zu  %.6f  %s\n", k.rank, k.score, k.term.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversational question answering with graph-ranked contextual keywords"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides overrides;
  overrides.attach(app);

  std::string input_file;
  auto* normalize_cmd = app.add_subcommand("normalize", "Print the normalized text and its tokens");
  normalize_cmd->add_option("file", input_file, "UTF-8 text file")->required()->check(CLI::ExistingFile);
  bool show_tokens = false;
  normalize_cmd->add_flag("--tokens", show_tokens, "Also print one token per line");

  auto* keywords_cmd = app.add_subcommand("keywords", "Rank the keywords of a text");
  keywords_cmd->add_option("file", input_file, "UTF-8 text file")->required()->check(CLI::ExistingFile);

  std::string dataset_path;
  std::string conv_id;
  std::size_t turn_index = 0;
  bool as_json = false;
  auto* ask_cmd = app.add_subcommand("ask", "Answer one dataset turn and print its trace");
  ask_cmd->add_option("--dataset", dataset_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
  ask_cmd->add_option("--conv", conv_id, "Conversation id")->required();
  ask_cmd->add_option("--turn", turn_index, "Turn index")->required();
  ask_cmd->add_flag("--json", as_json, "Print the full trace as JSON");

  std::string doc_path;
  auto* chat_cmd = app.add_subcommand("chat", "Interactive questions about one document");
  chat_cmd->add_option("--doc", doc_path, "Document text file")->required()->check(CLI::ExistingFile);

  std::string out_dir;
  std::string predictions_path;
  int jobs = 1;
  TableOptions table_flags;
  std::optional<int> bleu_order;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a dataset and write the metric report");
  eval_cmd->add_option("--dataset", dataset_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", out_dir, "Output directory")->required();
  eval_cmd->add_option("--predictions", predictions_path,
                       "Score this predictions JSONL instead of running the pipeline")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--jobs", jobs, "Conversations evaluated in parallel")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--rouge-table", table_flags.rouge_breakdown, "Add the ROUGE-1/2/SU breakdown");
  eval_cmd->add_flag("--bleu-table", table_flags.bleu_breakdown, "Add the BLEU 1-4 gram breakdown");
  eval_cmd->add_flag("--per-order", table_flags.bleu_per_order,
                     "BLEU breakdown shows per-order precisions instead of cumulative scores");
  eval_cmd->add_option("--bleu-order", bleu_order, "Cumulative BLEU order in the main table")
      ->check(CLI::Range(1, 4));

  std::string upstream_path;
  std::string convert_out;
  auto* convert_cmd = app.add_subcommand("convert", "Convert an upstream QA release into the dataset schema");
  convert_cmd->add_option("upstream", upstream_path, "Upstream JSON")->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("out", convert_out, "Output dataset JSON")->required();

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string ui_dir;
  std::string transcript_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the chat HTTP service");
  serve_cmd->add_option("--port", port, "Listen port");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--dataset", dataset_path, "Dataset whose documents sessions may reference")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--ui-dir", ui_dir, "Static files served at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--transcripts", transcript_dir, "Append session transcripts as JSONL here");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = overrides.resolve();

    if (*normalize_cmd) {
      const NormalizedText text = normalize_text(read_file(input_file));
      std::cout << text.str() << '\n';
      if (show_tokens) {
        for (const auto& t : tokenize(text)) std::cout << t.index << '\t' << t.start << '\t' << t.surface << '\n';
      }
      return 0;
    }

    if (*keywords_cmd) {
      print_keywords(extract_keywords(read_file(input_file), cfg.rank, StopList::load(cfg.stoplist)));
      return 0;
    }

    if (*convert_cmd) {
      json upstream;
      try {
        upstream = json::parse(read_file(upstream_path));
      } catch (const json::parse_error& e) {
        throw SchemaError(upstream_path + ": malformed JSON at byte " + std::to_string(e.byte));
      }
      const Dataset dataset = convert_upstream(upstream);
      std::ofstream out(convert_out, std::ios::binary | std::ios::trunc);
      out << serialize_dataset(dataset) << '\n';
      std::cerr << "converted " << dataset.conversations.size() << " conversations, "
                << dataset.turn_count() << " turns\n";
      return 0;
    }

    if (*ask_cmd) {
      const Dataset dataset = load_dataset(dataset_path);
      const Conversation* conv = dataset.find(conv_id);
      if (!conv) throw ArgumentError("no conversation \"" + conv_id + "\" in " + dataset_path);
      Pipeline pipeline(cfg, make_backend(cfg.backend, &dataset));
      std::map<std::size_t, std::string> predicted;
      if (cfg.history_mode == HistoryMode::kSelfPredicted) {
        for (std::size_t t = 0; t < turn_index && t < conv->turns.size(); ++t) {
          predicted[t] = pipeline.run_turn(*conv, t, predicted).final_answer;
        }
      }
      const TurnTrace trace = pipeline.run_turn(*conv, turn_index, predicted);
      if (as_json) {
        std::cout << trace.to_json().dump(2) << '\n';
      } else {
        std::cout << "question: " << trace.question << '\n'
                  << "answer:   " << trace.final_answer << '\n'
                  << "keywords (" << trace.keyword_source << "):\n";
        print_keywords(trace.extracted_keywords);
      }
      return 0;
    }

    if (*chat_cmd) {
      if (cfg.backend.kind == "echo_gold") {
        throw ConfigError("chat needs a canned, fixed or remote backend (--backend)");
      }
      const std::string document = read_file(doc_path);
      auto pipeline = std::make_shared<const Pipeline>(cfg, make_backend(cfg.backend));
      ChatService service(pipeline);
      const std::string session = service.create_session({{"document_text", document}})["session_id"];
      std::cout << "session " << session << " (empty line or /exit quits)\n";
      std::string line;
      while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line.empty() || line == "/exit") break;
        try {
          const json reply = service.ask(session, {{"question", line}});
          std::cout << reply["answer"].get<std::string>() << '\n';
          std::cout << "  keywords:";
          for (const auto& k : reply["keywords"]) std::cout << ' ' << k["term"].get<std::string>();
          std::cout << '\n';
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << '\n';
        }
      }
      return 0;
    }

    if (*eval_cmd) {
      const Dataset dataset = load_dataset(dataset_path);
      TableOptions table = cfg.table;
      table.rouge_breakdown = table.rouge_breakdown || table_flags.rouge_breakdown;
      table.bleu_breakdown = table.bleu_breakdown || table_flags.bleu_breakdown;
      table.bleu_per_order = table.bleu_per_order || table_flags.bleu_per_order;
      if (bleu_order) table.bleu_order = *bleu_order;

      const auto start = std::chrono::steady_clock::now();
      const std::string started_at = utc_timestamp();
      EvalResult result;
      if (!predictions_path.empty()) {
        result = score_predictions(dataset, read_file(predictions_path), cfg.metrics);
      } else {
        PipelineConfig eval_cfg = cfg;
        if (eval_cfg.backend.params.temperature != 0.0) {
          std::cerr << "note: evaluation runs at temperature 0\n";
          eval_cfg.backend.params.temperature = 0.0;
        }
        Pipeline pipeline(eval_cfg, make_backend(eval_cfg.backend, &dataset));
        result = run_eval(dataset, pipeline, jobs);
      }
      const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
      write_eval_outputs(result, out_dir, table,
                         {{"started_at", started_at}, {"elapsed_seconds", elapsed.count()}});
      std::cout << result.report_table(table);
      std::cerr << "wrote " << out_dir << "/{predictions.jsonl,instances.jsonl,report.json,report.txt}\n";
      return 0;
    }

    if (*serve_cmd) {
      std::optional<Dataset> dataset;
      if (!dataset_path.empty()) dataset = load_dataset(dataset_path);
      auto pipeline = std::make_shared<const Pipeline>(
          cfg, make_backend(cfg.backend, dataset ? &*dataset : nullptr));
      ChatService service(pipeline, dataset ? &*dataset : nullptr, {transcript_dir});
      httplib::Server server;
      register_routes(server, service);
      if (!ui_dir.empty()) server.set_mount_point("/", ui_dir);
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
