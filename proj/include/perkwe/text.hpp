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

#ifndef PERKWE_TEXT_HPP_
#define PERKWE_TEXT_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace perkwe {

inline constexpr char32_t kZwnj = U'\u200C';

// UTF-8 text in canonical form. Only normalize_text() produces one, so
// holding a NormalizedText is proof that the invariants below hold:
//  - Arabic yeh/alef maksura/kaf folded to Persian yeh/kaf
//  - no Arabic diacritics (U+064B..U+065F) and no tatweel
//  - Persian and Arabic-Indic digits folded to ASCII
//  - whitespace runs collapsed to one space, no leading/trailing space
class NormalizedText {
 public:
  NormalizedText() = default;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;

 private:
  friend NormalizedText normalize_text(std::string_view raw);
  explicit NormalizedText(std::string text) : text_(std::move(text)) {}

  std::string text_;
};

// Total function over arbitrary bytes: invalid UTF-8 sequences become
// U+FFFD. Idempotent.
NormalizedText normalize_text(std::string_view raw);

struct Token {
  std::string surface;     // never empty, no whitespace, no edge ZWNJ
  std::size_t start = 0;   // code point offset into the normalized text
  std::size_t index = 0;   // ordinal within one tokenization result

  friend bool operator==(const Token&, const Token&) = default;
};

// Splits on whitespace and on every character that is not a letter, mark,
// number or ZWNJ. Punctuation (general category P*) is dropped. ZWNJ stays
// inside tokens, so half-space compounds are one token.
std::vector<Token> tokenize(const NormalizedText& text);

// Convenience: tokenize(normalize_text(raw)) surfaces only.
std::vector<std::string> token_surfaces(std::string_view raw);

class StopList {
 public:
  StopList() = default;

  // The bundled list of Persian function words.
  static StopList builtin();
  // UTF-8, one entry per line, '#' starts a comment, blank lines ignored.
  static StopList from_file(const std::filesystem::path& path);
  static StopList from_string(std::string_view content, std::string source);
  // "builtin" or a file path.
  static StopList load(const std::string& spec);

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& source() const noexcept { return source_; }
  const std::unordered_set<std::string>& entries() const noexcept { return entries_; }

 private:
  std::unordered_set<std::string> entries_;
  std::string source_ = "empty";
};

// Keeps order and original Token::index of the survivors.
std::vector<Token> filter_stopwords(const std::vector<Token>& tokens, const StopList& stops);

// --- UTF-8 helpers shared by the other modules ---

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);
// Number of code points; the unit for every "character" length here.
std::size_t codepoint_length(std::string_view s);
// The longest prefix of s holding at most n code points.
std::string utf8_prefix(std::string_view s, std::size_t n);

bool is_punctuation(char32_t cp);
bool is_all_digits(std::string_view s);

}  // namespace perkwe

#endif  // PERKWE_TEXT_HPP_
