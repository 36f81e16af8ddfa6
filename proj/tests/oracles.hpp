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

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's metric, graph or
// normalization code; inputs are plain whitespace-separated tokens.

#ifndef PERKWE_TESTS_ORACLES_HPP_
#define PERKWE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// --- normalization: per-code-point expectation from the Unicode charts ---

// Returns the expected replacement of a single code point in the Arabic
// block and the digit ranges: -1 = removed, 0 = unchanged, else the target.
inline long expected_fold(char32_t cp) {
  static const std::map<char32_t, long> kTable = [] {
    std::map<char32_t, long> t;
    t[0x064A] = 0x06CC;  // ARABIC LETTER YEH -> FARSI YEH
    t[0x0649] = 0x06CC;  // ARABIC LETTER ALEF MAKSURA -> FARSI YEH
    t[0x0643] = 0x06A9;  // ARABIC LETTER KAF -> KEHEH
    t[0x0640] = -1;      // TATWEEL
    const char32_t marks[] = {0x064B, 0x064C, 0x064D, 0x064E, 0x064F, 0x0650, 0x0651,
                              0x0652, 0x0653, 0x0654, 0x0655, 0x0656, 0x0657, 0x0658,
                              0x0659, 0x065A, 0x065B, 0x065C, 0x065D, 0x065E, 0x065F};
    for (char32_t m : marks) t[m] = -1;
    const char32_t persian_digits[] = {0x06F0, 0x06F1, 0x06F2, 0x06F3, 0x06F4,
                                       0x06F5, 0x06F6, 0x06F7, 0x06F8, 0x06F9};
    const char32_t arabic_digits[] = {0x0660, 0x0661, 0x0662, 0x0663, 0x0664,
                                      0x0665, 0x0666, 0x0667, 0x0668, 0x0669};
    const char ascii[] = "0123456789";
    for (int i = 0; i < 10; ++i) {
      t[persian_digits[i]] = ascii[i];
      t[arabic_digits[i]] = ascii[i];
    }
    return t;
  }();
  auto it = kTable.find(cp);
  return it == kTable.end() ? 0 : it->second;
}

// --- co-occurrence: double loop over all pairs ---

inline std::map<std::pair<std::string, std::string>, long> pair_counts(
    const std::vector<std::string>& tokens, std::size_t window) {
  std::map<std::pair<std::string, std::string>, long> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (i >= j || j - i >= window || tokens[i] == tokens[j]) continue;
      const auto& a = std::min(tokens[i], tokens[j]);
      const auto& b = std::max(tokens[i], tokens[j]);
      ++counts[{a, b}];
    }
  }
  return counts;
}

// --- PageRank: dense matrix power iteration to 1e-12 ---

inline std::vector<double> dense_pagerank(const std::vector<std::vector<double>>& w, double d) {
  const std::size_t n = w.size();
  if (n == 0) return {};
  std::vector<double> out_weight(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) out_weight[u] += w[u][v];
  }
  std::vector<double> s(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> next(n, (1.0 - d) / static_cast<double>(n));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        if (w[u][v] > 0.0) next[v] += d * s[u] * w[u][v] / out_weight[u];
      }
    }
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) delta += std::fabs(next[v] - s[v]);
    s = next;
    if (delta < 1e-14) break;
  }
  double total = 0.0;
  for (double x : s) total += x;
  for (double& x : s) x /= total;
  return s;
}

// --- n-gram metrics by explicit enumeration ---

inline std::vector<std::string> ngrams(const std::vector<std::string>& toks, std::size_t n) {
  std::vector<std::string> out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) g += toks[i + k] + "\x1f";
    out.push_back(g);
  }
  return out;
}

inline long count_of(const std::vector<std::string>& list, const std::string& x) {
  return static_cast<long>(std::count(list.begin(), list.end(), x));
}

// Clipped matches: each distinct candidate unit counts min(cand, ref).
inline long clipped(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  std::vector<std::string> distinct;
  for (const auto& g : cand) {
    if (std::find(distinct.begin(), distinct.end(), g) == distinct.end()) distinct.push_back(g);
  }
  long m = 0;
  for (const auto& g : distinct) m += std::min(count_of(cand, g), count_of(ref, g));
  return m;
}

struct Prf {
  double p = 0, r = 0, f = 0;
};

inline Prf prf_from_counts(long match, long cand_total, long ref_total) {
  if (cand_total == 0 && ref_total == 0) return {1, 1, 1};
  if (cand_total == 0 || ref_total == 0) return {0, 0, 0};
  Prf x;
  x.p = static_cast<double>(match) / static_cast<double>(cand_total);
  x.r = static_cast<double>(match) / static_cast<double>(ref_total);
  x.f = x.p + x.r > 0 ? 2 * x.p * x.r / (x.p + x.r) : 0.0;
  return x;
}

inline Prf rouge_n(const std::string& pred, const std::string& ref, std::size_t n) {
  const auto c = ngrams(split(pred), n);
  const auto r = ngrams(split(ref), n);
  return prf_from_counts(clipped(c, r), static_cast<long>(c.size()), static_cast<long>(r.size()));
}

inline std::vector<std::string> su_units(const std::vector<std::string>& t, std::size_t max_skip) {
  std::vector<std::string> out = ngrams(t, 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (j - i - 1 <= max_skip) out.push_back(t[i] + "\x1f" + t[j] + "\x1f\x1e");
    }
  }
  return out;
}

inline Prf rouge_su(const std::string& pred, const std::string& ref, std::size_t max_skip) {
  const auto c = su_units(split(pred), max_skip);
  const auto r = su_units(split(ref), max_skip);
  return prf_from_counts(clipped(c, r), static_cast<long>(c.size()), static_cast<long>(r.size()));
}

// Token F1 on pre-split tokens (clitic removal is the caller's job).
inline Prf token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  return prf_from_counts(clipped(pred, gold), static_cast<long>(pred.size()),
                         static_cast<long>(gold.size()));
}

// Modified n-gram precision for one candidate against several references:
// candidate count clipped by the maximum count in any single reference.
inline std::pair<long, long> modified_precision_counts(const std::vector<std::string>& cand,
                                                       const std::vector<std::vector<std::string>>& refs,
                                                       std::size_t n) {
  const auto c = ngrams(cand, n);
  std::vector<std::string> distinct;
  for (const auto& g : c) {
    if (std::find(distinct.begin(), distinct.end(), g) == distinct.end()) distinct.push_back(g);
  }
  long m = 0;
  for (const auto& g : distinct) {
    long max_ref = 0;
    for (const auto& r : refs) max_ref = std::max(max_ref, count_of(ngrams(r, n), g));
    m += std::min(count_of(c, g), max_ref);
  }
  return {m, static_cast<long>(c.size())};
}

// Corpus BLEU with brevity penalty over the closest reference lengths.
// Returns per-order precisions, cumulative scores and BP.
struct Bleu {
  double p[4] = {0, 0, 0, 0};
  double cum[4] = {0, 0, 0, 0};
  double bp = 0;
};

// A positive epsilon replaces zero precisions (sentence-level smoothing).
inline Bleu corpus_bleu(const std::vector<std::string>& preds,
                        const std::vector<std::vector<std::string>>& refs_text, double epsilon = 0.0) {
  long match[4] = {0, 0, 0, 0}, tot[4] = {0, 0, 0, 0}, ref_grams[4] = {0, 0, 0, 0};
  long c = 0, r = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto cand = split(preds[i]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& t : refs_text[i]) refs.push_back(split(t));
    c += static_cast<long>(cand.size());
    long best = -1;
    for (const auto& ref : refs) {
      const long len = static_cast<long>(ref.size());
      const long cl = static_cast<long>(cand.size());
      if (best < 0 || std::labs(len - cl) < std::labs(best - cl) ||
          (std::labs(len - cl) == std::labs(best - cl) && len < best)) {
        best = len;
      }
    }
    r += best;
    for (std::size_t n = 1; n <= 4; ++n) {
      auto [m, t] = modified_precision_counts(cand, refs, n);
      match[n - 1] += m;
      tot[n - 1] += t;
      ref_grams[n - 1] += std::max(0L, best - static_cast<long>(n) + 1);
    }
  }
  Bleu b;
  if (c == 0 && r == 0) {
    for (int n = 0; n < 4; ++n) b.p[n] = b.cum[n] = 1.0;
    b.bp = 1.0;
    return b;
  }
  if (c == 0) return b;
  b.bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  for (int n = 0; n < 4; ++n) {
    b.p[n] = tot[n] > 0 ? static_cast<double>(match[n]) / static_cast<double>(tot[n])
                        : (ref_grams[n] == 0 ? 1.0 : 0.0);
  }
  double smoothed[4];
  for (int n = 0; n < 4; ++n) smoothed[n] = b.p[n] > 0 ? b.p[n] : epsilon;
  for (int n = 1; n <= 4; ++n) {
    double product = 1.0;
    for (int k = 0; k < n; ++k) product *= smoothed[k];
    b.cum[n - 1] = product > 0 ? b.bp * std::pow(product, 1.0 / n) : 0.0;
  }
  return b;
}

}  // namespace oracle

#endif  // PERKWE_TESTS_ORACLES_HPP_
