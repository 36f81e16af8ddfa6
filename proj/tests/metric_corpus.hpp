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

// Hand-built prediction/reference pairs for the metric oracle checks.
// Tokens are space-separated, lowercase and punctuation-free so the
// oracle's plain whitespace split sees the same tokens as the scorer.

#ifndef PERKWE_TESTS_METRIC_CORPUS_HPP_
#define PERKWE_TESTS_METRIC_CORPUS_HPP_

#include <string>
#include <vector>

#include "oracles.hpp"

namespace corpus {

struct Pair {
  std::string prediction;
  std::vector<std::string> references;
};

inline const std::vector<Pair>& pairs() {
  static const std::vector<Pair> kPairs = {
      {"b c", {"b c d"}},
      {"the cat sat", {"the cat"}},
      {"a b c", {"a c"}},
      {"the the the the the the the", {"the cat is on the mat"}},
      {"x y z", {"x y z u v w"}},
      {"تهران", {"تهران"}},
      {"شهر تهران", {"تهران"}},
      {"در دوره صفوی", {"دوره صفوی"}},
      {"قرن هشتم هجری", {"قرن هشتم هجری", "در قرن هشتم هجری"}},
      {"حافظیه", {"آرامگاه حافظیه"}},
      {"شیراز", {"اصفهان"}},
      {"کوه دماوند در البرز", {"رشته‌کوه البرز"}},
      {"حدود 5610 متر", {"5610 متر", "حدود 5610 متر ارتفاع"}},
      {"داریوش بزرگ پادشاه هخامنشی", {"داریوش بزرگ"}},
      {"اسکندر", {"اسکندر مقدونی"}},
      {"سال 330 پیش از میلاد", {"330 پیش از میلاد"}},
      {"رود ولگا رود ولگا", {"رود ولگا"}},
      {"پنج کشور", {"پنج"}},
      {"غیرقابل پاسخ", {"غیرقابل پاسخ"}},
      {"غیرقابل پاسخ", {"شمال ایران"}},
      {"a b a b a b", {"a b c a b"}},
      {"one two three four five", {"five four three two one"}},
      {"alpha beta gamma delta", {"alpha beta gamma delta epsilon", "alpha gamma"}},
      {"می‌رود به دریا", {"به دریای خزر می‌ریزد"}},
      {"", {"تهران"}},
  };
  return kPairs;
}

inline const std::vector<std::string>& clitics() {
  static const std::vector<std::string> kClitics = {"و", "در", "از", "به", "را"};
  return kClitics;
}

inline std::vector<std::string> without_clitics(const std::string& s) {
  std::vector<std::string> out;
  for (auto& t : oracle::split(s)) {
    bool clitic = false;
    for (const auto& c : clitics()) clitic = clitic || t == c;
    if (!clitic) out.push_back(t);
  }
  return out;
}

// Best-f1 token F1 over the references, first reference wins ties.
inline oracle::Prf best_token_f1(const Pair& p) {
  oracle::Prf best;
  bool first = true;
  for (const auto& r : p.references) {
    const auto x = oracle::token_f1(without_clitics(p.prediction), without_clitics(r));
    if (first || x.f > best.f) best = x;
    first = false;
  }
  return best;
}

}  // namespace corpus

#endif  // PERKWE_TESTS_METRIC_CORPUS_HPP_
