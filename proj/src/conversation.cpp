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

#include "perkwe/conversation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

using nlohmann::json;

bool is_unanswerable(std::string_view answer) {
  static const NormalizedText sentinel = normalize_text(kUnanswerable);
  return normalize_text(answer) == sentinel;
}

std::size_t Dataset::turn_count() const {
  std::size_t n = 0;
  for (const auto& conv : conversations) n += conv.turns.size();
  return n;
}

const Conversation* Dataset::find(std::string_view conversation_id) const {
  for (const auto& conv : conversations) {
    if (conv.id == conversation_id) return &conv;
  }
  return nullptr;
}

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const json& require(const json& object, const char* key, const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) schema_fail(path + "." + key, "missing required field");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& path,
                           bool non_empty) {
  const json& value = require(object, key, path);
  if (!value.is_string()) schema_fail(path + "." + key, "expected a string");
  std::string s = value.get<std::string>();
  if (non_empty && normalize_text(s).empty()) schema_fail(path + "." + key, "must not be empty");
  return s;
}

const json& require_array(const json& object, const char* key, const std::string& path) {
  const json& value = require(object, key, path);
  if (!value.is_array()) schema_fail(path + "." + key, "expected an array");
  return value;
}

void require_object(const json& value, const std::string& path) {
  if (!value.is_object()) schema_fail(path, "expected an object");
}

Turn parse_turn(const json& j, std::size_t position, const std::string& path) {
  require_object(j, path);
  Turn turn;
  const json& index = require(j, "index", path);
  if (!index.is_number_unsigned() && !index.is_number_integer()) {
    schema_fail(path + ".index", "expected an integer");
  }
  if (index.get<long long>() != static_cast<long long>(position)) {
    schema_fail(path + ".index", "turn indices must be 0..n-1 in order, expected " +
                                     std::to_string(position));
  }
  turn.index = position;
  turn.question = require_string(j, "question", path, true);
  const json& answers = require_array(j, "answers", path);
  if (answers.empty()) schema_fail(path + ".answers", "at least one answer is required");
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const std::string apath = path + ".answers[" + std::to_string(i) + "]";
    if (!answers[i].is_string()) schema_fail(apath, "expected a string");
    turn.gold_answers.push_back(answers[i].get<std::string>());
  }
  turn.unanswerable = std::all_of(turn.gold_answers.begin(), turn.gold_answers.end(),
                                  [](const std::string& a) { return is_unanswerable(a); });
  return turn;
}

Conversation parse_conversation(const json& j, const std::string& path) {
  require_object(j, path);
  Conversation conv;
  conv.id = require_string(j, "id", path, true);
  const json& doc = require(j, "document", path);
  const std::string dpath = path + ".document";
  require_object(doc, dpath);
  conv.document.id = require_string(doc, "id", dpath, true);
  conv.document.title = require_string(doc, "title", dpath, false);
  conv.document.text = require_string(doc, "text", dpath, true);
  const json& turns = require_array(j, "turns", path);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    conv.turns.push_back(parse_turn(turns[i], i, path + ".turns[" + std::to_string(i) + "]"));
  }
  return conv;
}

}  // namespace

Dataset parse_dataset(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  require_object(root, "$");
  const json& version = require(root, "version", "$");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    schema_fail("$.version", "unsupported version (expected 1)");
  }
  const json& convs = require_array(root, "conversations", "$");

  Dataset dataset;
  std::set<std::string> conv_ids;
  std::map<std::string, const Document*> docs;
  dataset.conversations.reserve(convs.size());
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const std::string path = "$.conversations[" + std::to_string(i) + "]";
    dataset.conversations.push_back(parse_conversation(convs[i], path));
    const Conversation& conv = dataset.conversations.back();
    if (!conv_ids.insert(conv.id).second) schema_fail(path + ".id", "duplicate conversation id");
  }
  // Several dialogs may share a document; the same id must mean the same text.
  for (std::size_t i = 0; i < dataset.conversations.size(); ++i) {
    const Document& doc = dataset.conversations[i].document;
    auto [it, inserted] = docs.emplace(doc.id, &doc);
    if (!inserted && !(*it->second == doc)) {
      schema_fail("$.conversations[" + std::to_string(i) + "].document.id",
                  "document id reused with different content");
    }
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

json dataset_to_json(const Dataset& dataset) {
  json convs = json::array();
  for (const auto& conv : dataset.conversations) {
    json turns = json::array();
    for (const auto& turn : conv.turns) {
      turns.push_back({{"index", turn.index}, {"question", turn.question}, {"answers", turn.gold_answers}});
    }
    convs.push_back({{"id", conv.id},
                     {"document",
                      {{"id", conv.document.id}, {"title", conv.document.title}, {"text", conv.document.text}}},
                     {"turns", std::move(turns)}});
  }
  return {{"version", 1}, {"conversations", std::move(convs)}};
}

std::string serialize_dataset(const Dataset& dataset) { return dataset_to_json(dataset).dump(2); }

namespace {

std::string upstream_answer(const std::string& text) {
  static const std::set<std::string> kNoAnswer = {"unknown", "cannotanswer", "no answer", ""};
  const std::string folded = normalize_text(text).str();
  return kNoAnswer.count(folded) ? std::string(kUnanswerable) : text;
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

Dataset convert_coqa(const json& data) {
  Dataset out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const json& item = data[i];
    const std::string path = "$.data[" + std::to_string(i) + "]";
    Conversation conv;
    conv.id = string_field(item, "id");
    if (conv.id.empty()) conv.id = "coqa-" + std::to_string(i);
    conv.document.id = conv.id;
    conv.document.title = string_field(item, "filename");
    conv.document.text = require_string(item, "story", path, true);
    const json& questions = require_array(item, "questions", path);
    const json& answers = require_array(item, "answers", path);
    if (questions.size() != answers.size()) {
      schema_fail(path, "questions and answers differ in length");
    }
    const json* extra = item.contains("additional_answers") ? &item["additional_answers"] : nullptr;
    for (std::size_t t = 0; t < questions.size(); ++t) {
      Turn turn;
      turn.index = t;
      turn.question = require_string(questions[t], "input_text",
                                     path + ".questions[" + std::to_string(t) + "]", true);
      turn.gold_answers.push_back(upstream_answer(string_field(answers[t], "input_text")));
      if (extra && extra->is_object()) {
        for (const auto& [key, alt] : extra->items()) {
          if (alt.is_array() && t < alt.size()) {
            turn.gold_answers.push_back(upstream_answer(string_field(alt[t], "input_text")));
          }
        }
      }
      turn.unanswerable = std::all_of(turn.gold_answers.begin(), turn.gold_answers.end(),
                                      [](const std::string& a) { return is_unanswerable(a); });
      conv.turns.push_back(std::move(turn));
    }
    out.conversations.push_back(std::move(conv));
  }
  return out;
}

Dataset convert_quac(const json& data) {
  Dataset out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const json& article = data[i];
    const std::string apath = "$.data[" + std::to_string(i) + "]";
    const std::string title = string_field(article, "title");
    const json& paragraphs = require_array(article, "paragraphs", apath);
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const json& para = paragraphs[p];
      const std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      Conversation conv;
      conv.id = string_field(para, "id");
      if (conv.id.empty()) conv.id = "dialog-" + std::to_string(i) + "-" + std::to_string(p);
      conv.document.id = conv.id;
      conv.document.title = title;
      std::string context = require_string(para, "context", ppath, true);
      static constexpr std::string_view kTail = " CANNOTANSWER";
      if (context.size() >= kTail.size() &&
          context.compare(context.size() - kTail.size(), kTail.size(), kTail) == 0) {
        context.resize(context.size() - kTail.size());
      }
      conv.document.text = std::move(context);
      const json& qas = require_array(para, "qas", ppath);
      for (std::size_t t = 0; t < qas.size(); ++t) {
        const json& qa = qas[t];
        const std::string qpath = ppath + ".qas[" + std::to_string(t) + "]";
        Turn turn;
        turn.index = t;
        turn.question = require_string(qa, "question", qpath, true);
        const bool impossible = qa.value("is_impossible", false);
        if (!impossible && qa.contains("answers") && qa["answers"].is_array()) {
          std::set<std::string> seen;
          for (const auto& a : qa["answers"]) {
            std::string text = upstream_answer(string_field(a, "text"));
            if (seen.insert(text).second) turn.gold_answers.push_back(std::move(text));
          }
        }
        if (turn.gold_answers.empty()) turn.gold_answers.emplace_back(kUnanswerable);
        turn.unanswerable = std::all_of(turn.gold_answers.begin(), turn.gold_answers.end(),
                                        [](const std::string& a) { return is_unanswerable(a); });
        conv.turns.push_back(std::move(turn));
      }
      out.conversations.push_back(std::move(conv));
    }
  }
  return out;
}

}  // namespace

Dataset convert_upstream(const json& upstream) {
  if (upstream.is_object() && upstream.contains("conversations")) {
    return parse_dataset(upstream.dump());
  }
  if (!upstream.is_object()) schema_fail("$", "expected an object");
  const json& data = require_array(upstream, "data", "$");
  if (data.empty()) return {};
  if (data[0].contains("story")) return convert_coqa(data);
  if (data[0].contains("paragraphs")) return convert_quac(data);
  schema_fail("$.data[0]", "unrecognized upstream layout (expected \"story\" or \"paragraphs\")");
}

std::string_view to_string(HistoryMode mode) {
  return mode == HistoryMode::kTeacherForced ? "teacher_forced" : "self_predicted";
}

HistoryMode history_mode_from_string(std::string_view name) {
  if (name == "teacher_forced") return HistoryMode::kTeacherForced;
  if (name == "self_predicted") return HistoryMode::kSelfPredicted;
  throw ConfigError("history_mode must be \"teacher_forced\" or \"self_predicted\", got \"" +
                    std::string(name) + "\"");
}

HistoryView history_window(const Conversation& conversation, std::size_t turn_index,
                           std::size_t max_history, HistoryMode mode,
                           const std::map<std::size_t, std::string>& predicted) {
  if (turn_index >= conversation.turns.size()) {
    throw ArgumentError("turn index " + std::to_string(turn_index) + " out of range for " +
                        conversation.id + " (" + std::to_string(conversation.turns.size()) +
                        " turns)");
  }
  HistoryView view;
  const std::size_t count = std::min(turn_index, max_history);
  for (std::size_t t = turn_index - count; t < turn_index; ++t) {
    const Turn& turn = conversation.turns[t];
    std::string answer;
    if (mode == HistoryMode::kTeacherForced) {
      answer = turn.gold_answers.front();
    } else {
      auto it = predicted.find(t);
      if (it == predicted.end()) {
        throw ArgumentError("no prediction recorded for turn " + std::to_string(t) + " of " +
                            conversation.id);
      }
      answer = it->second;
    }
    view.entries.push_back({turn.question, std::move(answer)});
  }
  return view;
}

}  // namespace perkwe
