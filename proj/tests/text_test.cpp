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

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fuzz.hpp"
#include "oracles.hpp"
#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

using namespace perkwe;

namespace {

std::string u8(char32_t cp) {
  std::string s;
  append_utf8(s, cp);
  return s;
}

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("normalize folds Arabic kaf to Persian kaf") {
  CHECK(normalize_text("كتاب").str() == "کتاب");
}

TEST_CASE("normalize of empty input is empty") {
  CHECK(normalize_text("").str().empty());
  CHECK(normalize_text(" \t\n ").empty());
}

TEST_CASE("normalize folds Persian and Arabic-Indic digits") {
  CHECK(normalize_text("۱۲۳").str() == "123");
  CHECK(normalize_text("٤٥").str() == "45");
}

TEST_CASE("normalize folds yeh and alef maksura") {
  CHECK(normalize_text("علي").str() == "علی");
  CHECK(normalize_text("موسى").str() == "موسی");
}

TEST_CASE("normalize strips diacritics and tatweel") {
  CHECK(normalize_text("كَتاب").str() == "کتاب");
  CHECK(normalize_text("ســلام").str() == "سلام");
}

TEST_CASE("normalize collapses whitespace and trims") {
  CHECK(normalize_text("  a \t\n b  c  ").str() == "a b c");
}

TEST_CASE("normalize lowercases Latin only") {
  CHECK(normalize_text("Hello WORLD À").str() == "hello world à");
  CHECK(normalize_text("ДА").str() == "ДА");
  CHECK(normalize_text("Σ").str() == "Σ");
}

TEST_CASE("normalize keeps ZWNJ") {
  CHECK(normalize_text("می‌رود").str() == "می‌رود");
}

TEST_CASE("normalize replaces invalid UTF-8") {
  const std::string bad = std::string("a") + static_cast<char>(0xC3) + "b" + static_cast<char>(0xFF);
  const auto n = normalize_text(bad).str();
  CHECK(n == "a�b�");
}

TEST_CASE("normalize matches the per-code-point table over the Arabic block and digits") {
  for (char32_t cp = 0x0600; cp <= 0x06FF; ++cp) {
    const long want = oracle::expected_fold(cp);
    const std::string got = normalize_text("x" + u8(cp) + "x").str();
    std::string expect;
    if (want == -1) {
      expect = "xx";
    } else if (want == 0) {
      continue;  // unmapped code points are checked by the idempotence property
    } else {
      expect = "x" + u8(static_cast<char32_t>(want)) + "x";
    }
    INFO("code point " << static_cast<unsigned>(cp));
    CHECK(got == expect);
  }
  for (char32_t cp = U'0'; cp <= U'9'; ++cp) CHECK(normalize_text(u8(cp)).str() == u8(cp));
}

TEST_CASE("normalize leaves unmapped Persian letters alone") {
  const std::u32string letters = U"ابپتثجچحخدذ"
                                 U"رزژسشصضطظعغ"
                                 U"فقکگلمنوهیآ";
  const std::string s = encode_utf8(letters);
  CHECK(normalize_text(s).str() == s);
}

TEST_CASE("normalize is idempotent on fuzzed input") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::string raw = fuzz::random_text(rng, 40);
    const auto once = normalize_text(raw);
    const auto twice = normalize_text(once.str());
    REQUIRE(once == twice);
    const auto& s = once.str();
    if (!s.empty()) {
      CHECK(s.front() != ' ');
      CHECK(s.back() != ' ');
    }
    CHECK(s.find("  ") == std::string::npos);
    for (char32_t cp : decode_utf8(s)) {
      CHECK(oracle::expected_fold(cp) == 0);
    }
  }
}

TEST_CASE("tokenize splits on whitespace") {
  CHECK(surfaces(tokenize(normalize_text("سلام دنیا"))) == std::vector<std::string>{"سلام", "دنیا"});
}

TEST_CASE("tokenize keeps ZWNJ compounds whole") {
  CHECK(surfaces(tokenize(normalize_text("می‌رود"))) == std::vector<std::string>{"می‌رود"});
}

TEST_CASE("tokenize drops punctuation") {
  CHECK(surfaces(tokenize(normalize_text("سلام، دنیا!"))) == std::vector<std::string>{"سلام", "دنیا"});
  CHECK(token_surfaces("«الف» (ب) ج؟ د؛") == std::vector<std::string>{"الف", "ب", "ج", "د"});
  CHECK(token_surfaces("...!?").empty());
}

TEST_CASE("tokenize strips edge ZWNJ") {
  const std::string z = u8(kZwnj);
  CHECK(token_surfaces(z + "کتاب" + z) == std::vector<std::string>{"کتاب"});
  CHECK(token_surfaces(z).empty());
}

TEST_CASE("tokenize records code point offsets and dense indices") {
  const auto tokens = tokenize(normalize_text("ab، cd e"));
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0] == Token{"ab", 0, 0});
  CHECK(tokens[1] == Token{"cd", 4, 1});
  CHECK(tokens[2] == Token{"e", 7, 2});
}

TEST_CASE("tokens are whitespace-free, non-empty and reproduce their offsets") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto text = normalize_text(fuzz::random_text(rng, 50));
    const auto cps = decode_utf8(text.str());
    const auto tokens = tokenize(text);
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      const auto& t = tokens[k];
      REQUIRE(!t.surface.empty());
      CHECK(t.index == k);
      const auto tcp = decode_utf8(t.surface);
      CHECK(tcp.front() != kZwnj);
      CHECK(tcp.back() != kZwnj);
      REQUIRE(t.start + tcp.size() <= cps.size());
      CHECK(cps.substr(t.start, tcp.size()) == tcp);
      for (char32_t cp : tcp) {
        CHECK(cp != U' ');
        CHECK(!is_punctuation(cp));
      }
    }
  }
}

TEST_CASE("filter_stopwords keeps survivors with original indices") {
  const auto stops = StopList::from_string("او\nاز\n", "test");
  const auto tokens = tokenize(normalize_text("او از تهران آمد"));
  const auto kept = filter_stopwords(tokens, stops);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].surface == "تهران");
  CHECK(kept[0].index == 2);
  CHECK(kept[1].surface == "آمد");
  CHECK(kept[1].index == 3);
}

TEST_CASE("filter_stopwords on empty and no-hit input") {
  const auto stops = StopList::from_string("او\n", "test");
  CHECK(filter_stopwords({}, stops).empty());
  const auto tokens = tokenize(normalize_text("تهران شیراز"));
  CHECK(filter_stopwords(tokens, stops) == tokens);
}

TEST_CASE("stop list parsing normalizes entries and skips comments") {
  const auto stops = StopList::from_string("# comment\n\n  كه  \nيا # trailing\n", "t");
  CHECK(stops.size() == 2);
  CHECK(stops.contains("که"));
  CHECK(stops.contains("یا"));
  CHECK(!stops.contains("#"));
  CHECK(stops.source() == "t");
}

TEST_CASE("builtin stop list is normalized and covers common function words") {
  const auto stops = StopList::builtin();
  CHECK(stops.size() > 200);
  for (const char* w : {"و", "در", "از", "به", "را", "که", "این", "است", "با", "او"}) {
    INFO(w);
    CHECK(stops.contains(w));
  }
  for (const auto& e : stops.entries()) {
    CHECK(normalize_text(e).str() == e);
    CHECK(token_surfaces(e).size() == 1);
  }
  CHECK(StopList::load("builtin").size() == stops.size());
}

TEST_CASE("stop list from file and missing file") {
  const auto dir = std::filesystem::temp_directory_path() / "perkwe_text_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "stops.txt";
  {
    std::ofstream(path) << "الف\nب\n";
  }
  const auto stops = StopList::load(path.string());
  CHECK(stops.size() == 2);
  CHECK(stops.contains("ب"));
  CHECK_THROWS_AS(StopList::from_file(dir / "missing.txt"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("utf8 helpers") {
  CHECK(codepoint_length("سلام") == 4);
  CHECK(codepoint_length("") == 0);
  CHECK(utf8_prefix("سلام", 2) == "سل");
  CHECK(utf8_prefix("ab", 10) == "ab");
  CHECK(encode_utf8(decode_utf8("a\U0001F600b")) == "a\U0001F600b");
  CHECK(is_all_digits("123"));
  CHECK(!is_all_digits("12a"));
  CHECK(!is_all_digits(""));
  CHECK(is_punctuation(U'،'));
  CHECK(is_punctuation(U'«'));
  CHECK(!is_punctuation(U'a'));
}
