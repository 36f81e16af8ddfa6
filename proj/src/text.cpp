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

#include "perkwe/text.hpp"

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include <fstream>
#include <sstream>

#include "perkwe/errors.hpp"

namespace perkwe {
namespace detail {
extern const std::string_view kBuiltinStopwords;
}  // namespace detail

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_token_char(char32_t cp) {
  if (cp == kZwnj) return true;
  const auto mask = U_MASK(u_charType(static_cast<UChar32>(cp)));
  return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

bool is_latin(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  return uscript_getScript(static_cast<UChar32>(cp), &status) == USCRIPT_LATIN &&
         U_SUCCESS(status);
}

// Per-code-point folding. Returns 0 for code points that are removed.
char32_t fold(char32_t cp) {
  switch (cp) {
    case 0x064A:  // Arabic yeh
    case 0x0649:  // Arabic alef maksura
      return 0x06CC;
    case 0x0643:  // Arabic kaf
      return 0x06A9;
    case 0x0640:  // tatweel
      return 0;
    default:
      break;
  }
  if (cp >= 0x064B && cp <= 0x065F) return 0;
  if (cp >= 0x06F0 && cp <= 0x06F9) return U'0' + (cp - 0x06F0);
  if (cp >= 0x0660 && cp <= 0x0669) return U'0' + (cp - 0x0660);
  if (cp < 0x80) {
    return (cp >= U'A' && cp <= U'Z') ? cp + 0x20 : cp;
  }
  if (is_latin(cp)) return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
  return cp;
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? kReplacement : static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
  uint8_t buf[4];
  int32_t n = 0;
  U8_APPEND_UNSAFE(buf, n, static_cast<UChar32>(cp));
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    ++n;
  }
  return n;
}

std::string utf8_prefix(std::string_view s, std::size_t n) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  for (std::size_t k = 0; k < n && i < length; ++k) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
  }
  return std::string(s.substr(0, static_cast<std::size_t>(i)));
}

bool is_punctuation(char32_t cp) {
  switch (cp) {
    case U'«':
    case U'»':
    case U'،':
    case U'؛':
    case U'؟':
      return true;
    default:
      return (U_MASK(u_charType(static_cast<UChar32>(cp))) & U_GC_P_MASK) != 0;
  }
}

bool is_all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char32_t cp : decode_utf8(s)) {
    if (!u_isdigit(static_cast<UChar32>(cp))) return false;
  }
  return true;
}

NormalizedText normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char32_t cp : decode_utf8(raw)) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    const char32_t folded = fold(cp);
    if (folded == 0) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, folded);
  }
  return NormalizedText(std::move(out));
}

std::vector<Token> tokenize(const NormalizedText& text) {
  std::vector<Token> tokens;
  const std::u32string cps = decode_utf8(text.str());
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_token_char(cps[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < cps.size() && is_token_char(cps[i])) ++i;
    std::size_t end = i;
    while (begin < end && cps[begin] == kZwnj) ++begin;
    while (end > begin && cps[end - 1] == kZwnj) --end;
    if (begin == end) continue;
    Token token;
    token.surface = encode_utf8(std::u32string_view(cps).substr(begin, end - begin));
    token.start = begin;
    token.index = tokens.size();
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::vector<std::string> token_surfaces(std::string_view raw) {
  std::vector<std::string> out;
  for (auto& token : tokenize(normalize_text(raw))) out.push_back(std::move(token.surface));
  return out;
}

StopList StopList::from_string(std::string_view content, std::string source) {
  StopList list;
  list.source_ = std::move(source);
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    NormalizedText entry = normalize_text(line);
    if (!entry.empty()) list.entries_.insert(entry.str());
  }
  return list;
}

StopList StopList::builtin() { return from_string(detail::kBuiltinStopwords, "builtin"); }

StopList StopList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open stop-word file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

StopList StopList::load(const std::string& spec) {
  if (spec.empty() || spec == "builtin") return builtin();
  return from_file(spec);
}

bool StopList::contains(std::string_view word) const {
  return entries_.find(std::string(word)) != entries_.end();
}

std::vector<Token> filter_stopwords(const std::vector<Token>& tokens, const StopList& stops) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (!stops.contains(token.surface)) out.push_back(token);
  }
  return out;
}

}  // namespace perkwe
