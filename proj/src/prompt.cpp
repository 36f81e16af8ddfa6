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

#include "perkwe/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

const std::string_view kDefaultInstruction =
    "با توجه به متن و گفت‌وگوی پیشین به پرسش پاسخ دهید. فقط از اطلاعات موجود در متن و "
    "گفت‌وگو استفاده کنید و پاسخ را کوتاه بنویسید. اگر پاسخ در متن وجود ندارد، دقیقاً "
    "بنویسید: غیرقابل پاسخ";

namespace {

constexpr std::string_view kHistoryQuestionLabel = "پرسش: ";
constexpr std::string_view kHistoryAnswerLabel = "پاسخ: ";

constexpr std::pair<Slot, std::string_view> kSlotNames[] = {
    {Slot::kInstruction, "instruction"},
    {Slot::kPassage, "passage"},
    {Slot::kKeywords, "keywords"},
    {Slot::kHistory, "history"},
    {Slot::kQuestion, "question"},
};

}  // namespace

std::string_view to_string(Slot slot) {
  for (const auto& [s, name] : kSlotNames) {
    if (s == slot) return name;
  }
  return "unknown";
}

Slot slot_from_string(std::string_view name) {
  for (const auto& [s, n] : kSlotNames) {
    if (n == name) return s;
  }
  throw ConfigError("unknown prompt slot \"" + std::string(name) + "\"");
}

PromptTemplate PromptTemplate::standard() {
  PromptTemplate t;
  t.slots = {Slot::kInstruction, Slot::kKeywords, Slot::kPassage, Slot::kHistory, Slot::kQuestion};
  t.instruction_text = std::string(kDefaultInstruction);
  t.headers[Slot::kInstruction] = "";
  t.headers[Slot::kKeywords] = "\n\nکلیدواژه‌های گفت‌وگو:\n";
  t.headers[Slot::kPassage] = "\n\nمتن:\n";
  t.headers[Slot::kHistory] = "\n\nگفت‌وگوی پیشین:\n";
  t.headers[Slot::kQuestion] = "\n\nپرسش کنونی:\n";
  t.footer = "";
  return t;
}

PromptTemplate PromptTemplate::parse(std::string_view text, std::string instruction_text) {
  PromptTemplate t;
  t.instruction_text = std::move(instruction_text);
  std::size_t pos = 0;
  std::string pending;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw ConfigError("prompt template: unterminated '{{'");
    pending.append(text.substr(pos, open - pos));
    const Slot slot = slot_from_string(text.substr(open + 2, close - open - 2));
    if (t.headers.count(slot)) {
      throw ConfigError("prompt template: slot {{" + std::string(to_string(slot)) + "}} repeats");
    }
    t.slots.push_back(slot);
    t.headers[slot] = std::move(pending);
    pending.clear();
    pos = close + 2;
  }
  t.footer = std::string(text.substr(std::min(pos, text.size())));
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path,
                                         std::string instruction_text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open prompt template: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), std::move(instruction_text));
}

void PromptTemplate::validate() const {
  if (slots.empty() || slots.back() != Slot::kQuestion) {
    throw ConfigError("prompt template: the question slot must be present and last");
  }
  std::set<Slot> seen;
  for (Slot s : slots) {
    if (!seen.insert(s).second) {
      throw ConfigError("prompt template: slot " + std::string(to_string(s)) + " repeats");
    }
  }
}

const std::string& Prompt::question() const { return sections.at(Slot::kQuestion); }

namespace {

// Mutable content being fitted into the budget.
struct Content {
  std::string instruction;
  std::string passage;
  std::vector<HistoryEntry> history;
  std::vector<KeywordScore> keywords;
  std::string question;
};

std::string body_of(Slot slot, const Content& c) {
  switch (slot) {
    case Slot::kInstruction:
      return c.instruction;
    case Slot::kPassage:
      return c.passage;
    case Slot::kQuestion:
      return c.question;
    case Slot::kKeywords: {
      std::string out;
      for (std::size_t i = 0; i < c.keywords.size(); ++i) {
        if (i) out += kKeywordSeparator;
        out += c.keywords[i].term;
      }
      return out;
    }
    case Slot::kHistory: {
      std::string out;
      for (std::size_t i = 0; i < c.history.size(); ++i) {
        if (i) out += '\n';
        out += kHistoryQuestionLabel;
        out += c.history[i].question;
        out += '\n';
        out += kHistoryAnswerLabel;
        out += c.history[i].answer;
      }
      return out;
    }
  }
  return {};
}

Prompt render(const Content& c, const PromptTemplate& tmpl) {
  Prompt p;
  for (Slot slot : tmpl.slots) {
    std::string body = body_of(slot, c);
    if (body.empty() && slot != Slot::kQuestion) continue;
    auto header = tmpl.headers.find(slot);
    if (header != tmpl.headers.end()) p.rendered += header->second;
    p.rendered += body;
    p.sections.emplace(slot, std::move(body));
  }
  p.rendered += tmpl.footer;
  p.keywords = c.keywords;
  p.history_entries = c.history.size();
  return p;
}

std::size_t rendered_length(const Content& c, const PromptTemplate& tmpl) {
  return codepoint_length(render(c, tmpl).rendered);
}

bool has_slot(const PromptTemplate& tmpl, Slot slot) {
  return std::find(tmpl.slots.begin(), tmpl.slots.end(), slot) != tmpl.slots.end();
}

}  // namespace

Prompt assemble_prompt(std::string_view passage, const HistoryView& history,
                       const std::vector<KeywordScore>& keywords, std::string_view question,
                       const PromptTemplate& tmpl, std::size_t budget) {
  tmpl.validate();
  Content c;
  if (has_slot(tmpl, Slot::kInstruction)) c.instruction = tmpl.instruction_text;
  if (has_slot(tmpl, Slot::kPassage)) c.passage = std::string(passage);
  if (has_slot(tmpl, Slot::kHistory)) c.history = history.entries;
  if (has_slot(tmpl, Slot::kKeywords)) c.keywords = keywords;
  c.question = std::string(question);

  {
    Content minimal;
    minimal.instruction = c.instruction;
    minimal.question = c.question;
    const std::size_t floor = rendered_length(minimal, tmpl);
    if (floor > budget) {
      throw BudgetError("prompt budget of " + std::to_string(budget) +
                        " characters cannot hold the instruction and question (" +
                        std::to_string(floor) + " characters)");
    }
  }

  std::vector<DropRecord> dropped;
  std::size_t length = rendered_length(c, tmpl);

  while (length > budget && !c.history.empty()) {
    dropped.push_back({Slot::kHistory, "oldest history entry removed: " + c.history.front().question});
    c.history.erase(c.history.begin());
    length = rendered_length(c, tmpl);
  }

  if (length > budget && !c.passage.empty()) {
    const std::size_t original = codepoint_length(c.passage);
    Content probe = c;
    probe.passage = std::string(kTruncationMarker);
    const std::size_t base = rendered_length(probe, tmpl);
    if (budget > base) {
      const std::size_t keep = budget - base;
      c.passage = utf8_prefix(c.passage, keep) + std::string(kTruncationMarker);
      dropped.push_back({Slot::kPassage, "passage truncated from " + std::to_string(original) +
                                             " to " + std::to_string(keep) + " characters"});
    } else {
      c.passage.clear();
      dropped.push_back({Slot::kPassage, "passage removed (" + std::to_string(original) +
                                             " characters)"});
    }
    length = rendered_length(c, tmpl);
  }

  while (length > budget && !c.keywords.empty()) {
    const KeywordScore& last = c.keywords.back();
    dropped.push_back({Slot::kKeywords, "keyword removed: " + last.term + " (rank " +
                                            std::to_string(last.rank) + ")"});
    c.keywords.pop_back();
    length = rendered_length(c, tmpl);
  }

  Prompt prompt = render(c, tmpl);
  prompt.budget = budget;
  prompt.dropped = std::move(dropped);
  return prompt;
}

}  // namespace perkwe
