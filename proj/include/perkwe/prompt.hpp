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

#ifndef PERKWE_PROMPT_HPP_
#define PERKWE_PROMPT_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "perkwe/conversation.hpp"
#include "perkwe/keywords.hpp"

namespace perkwe {

enum class Slot { kInstruction, kPassage, kKeywords, kHistory, kQuestion };

std::string_view to_string(Slot slot);
Slot slot_from_string(std::string_view name);

// Default instruction: answer briefly from the passage and conversation only,
// and reply with the unanswerable sentinel when the passage lacks the answer.
extern const std::string_view kDefaultInstruction;

// Section layout. Each present slot renders as headers[slot] + body; the
// footer follows the question. The question slot is always present and last,
// and no slot repeats.
struct PromptTemplate {
  std::vector<Slot> slots;
  std::string instruction_text;
  std::map<Slot, std::string> headers;
  std::string footer;

  // instruction -> keywords -> passage -> history -> question
  static PromptTemplate standard();
  // Parses text with {{instruction}}, {{passage}}, {{keywords}}, {{history}}
  // and {{question}} placeholders. Literal text before a placeholder becomes
  // that slot's header; text after {{question}} becomes the footer.
  static PromptTemplate parse(std::string_view text, std::string instruction_text);
  static PromptTemplate from_file(const std::filesystem::path& path, std::string instruction_text);

  // Throws ConfigError.
  void validate() const;
};

inline constexpr std::string_view kKeywordSeparator = "، ";
inline constexpr std::string_view kTruncationMarker = "…";

struct DropRecord {
  Slot slot;
  std::string reason;

  friend bool operator==(const DropRecord&, const DropRecord&) = default;
};

struct Prompt {
  std::string rendered;
  std::map<Slot, std::string> sections;   // body text of every rendered slot
  std::vector<KeywordScore> keywords;     // keywords that made it into the prompt
  std::size_t history_entries = 0;        // history entries that made it in
  std::size_t budget = 0;                 // code points
  std::vector<DropRecord> dropped;

  const std::string& question() const;
};

// Renders the template within `budget` code points. Over budget, content is
// shed oldest history entry first, then the passage is cut from the tail
// (ending in "…") or removed, then keywords go from the lowest rank up.
// Throws BudgetError when instruction plus question alone do not fit.
Prompt assemble_prompt(std::string_view passage, const HistoryView& history,
                       const std::vector<KeywordScore>& keywords, std::string_view question,
                       const PromptTemplate& tmpl, std::size_t budget);

}  // namespace perkwe

#endif  // PERKWE_PROMPT_HPP_
