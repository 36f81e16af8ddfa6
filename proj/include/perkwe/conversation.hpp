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

#ifndef PERKWE_CONVERSATION_HPP_
#define PERKWE_CONVERSATION_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perkwe {

// The answer a passage-grounded reader gives when the passage does not
// contain the answer.
inline constexpr std::string_view kUnanswerable = "غیرقابل پاسخ";

// True iff normalize_text(answer) equals the normalized sentinel.
bool is_unanswerable(std::string_view answer);

struct Document {
  std::string id;
  std::string title;
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Turn {
  std::size_t index = 0;
  std::string question;
  std::vector<std::string> gold_answers;
  // Derived on load: every gold answer is the sentinel.
  bool unanswerable = false;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Conversation {
  std::string id;
  Document document;
  std::vector<Turn> turns;

  friend bool operator==(const Conversation&, const Conversation&) = default;
};

struct Dataset {
  std::vector<Conversation> conversations;

  std::size_t turn_count() const;
  const Conversation* find(std::string_view conversation_id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Schema (version 1):
//   {"version": 1,
//    "conversations": [{"id", "document": {"id", "title", "text"},
//                       "turns": [{"index", "question", "answers": [..]}]}]}
// Throws SchemaError with the JSON path of the first violation, or the byte
// offset of a syntax error.
Dataset parse_dataset(std::string_view json_text);
Dataset load_dataset(const std::filesystem::path& path);
nlohmann::json dataset_to_json(const Dataset& dataset);
std::string serialize_dataset(const Dataset& dataset);

// Maps an upstream QA release into the schema above. Understands CoQA-style
// ({"data": [{"story", "questions", "answers"}]}) and QuAC/SQuAD-style
// ({"data": [{"paragraphs": [{"context", "qas"}]}]}) layouts.
Dataset convert_upstream(const nlohmann::json& upstream);

enum class HistoryMode { kTeacherForced, kSelfPredicted };

std::string_view to_string(HistoryMode mode);
HistoryMode history_mode_from_string(std::string_view name);

struct HistoryEntry {
  std::string question;
  std::string answer;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct HistoryView {
  std::vector<HistoryEntry> entries;  // oldest first
};

// Last min(turn_index, max_history) turns before `turn_index`. Teacher-forced
// answers are the first gold answer; self-predicted answers come from
// `predicted`, keyed by turn index. Throws ArgumentError for an out-of-range
// index or a missing prediction.
HistoryView history_window(const Conversation& conversation, std::size_t turn_index,
                           std::size_t max_history, HistoryMode mode,
                           const std::map<std::size_t, std::string>& predicted = {});

}  // namespace perkwe

#endif  // PERKWE_CONVERSATION_HPP_
