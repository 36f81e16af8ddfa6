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

#ifndef PERKWE_METRICS_HPP_
#define PERKWE_METRICS_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perkwe {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // f1 = 2pr / (p + r), or 0 when p + r == 0.
  static PRF from(double precision, double recall);
};

inline constexpr int kMaxBleuOrder = 4;

struct BleuScore {
  // Index n-1 holds order n.
  std::array<double, kMaxBleuOrder> per_order{};   // modified precisions
  std::array<double, kMaxBleuOrder> cumulative{};  // BP * geometric mean of orders 1..n
  double brevity_penalty = 0.0;
};

// Answer tokens for EM and token F1: normalize, tokenize (punctuation is
// dropped) and remove the clitics و در از به را.
std::vector<std::string> metric_normalize(std::string_view answer);
// Tokens for BLEU and ROUGE: the same without the clitic removal.
std::vector<std::string> metric_tokens(std::string_view text);

// 1 iff the normalized prediction equals some normalized gold. Throws
// ArgumentError on an empty gold list.
int exact_match(std::string_view prediction, const std::vector<std::string>& golds);

// Multiset token overlap against each gold; returns the PRF of the gold
// with the highest f1. Empty against empty scores 1, empty against
// non-empty scores 0.
PRF token_f1(std::string_view prediction, const std::vector<std::string>& golds);

// Corpus BLEU: clipped n-gram counts summed over the corpus, brevity penalty
// from total candidate length c and total closest-reference length r.
// An order for which neither the candidates nor the effective references
// have any n-gram is vacuous and counts as precision 1. An empty candidate
// side scores 0 everywhere, unless the references are empty too, which
// scores 1. Throws ArgumentError on size mismatch or empty
// input.
BleuScore bleu(const std::vector<std::string>& predictions,
               const std::vector<std::vector<std::string>>& references, int max_n = kMaxBleuOrder);

// Single-pair BLEU for macro reporting; zero precisions become 1e-9.
BleuScore sentence_bleu(std::string_view prediction, const std::vector<std::string>& references,
                        int max_n = kMaxBleuOrder);

inline constexpr double kSentenceBleuEpsilon = 1e-9;

// Clipped n-gram overlap. When neither side has an n-gram the pair is
// trivially identical and scores 1; a zero denominator on one side gives 0.
PRF rouge_n(std::string_view prediction, std::string_view reference, int n);

// Unigrams plus ordered skip-bigrams with at most max_skip tokens between
// the pair.
PRF rouge_su(std::string_view prediction, std::string_view reference, int max_skip = 4);

struct InstanceScores {
  double em = 0.0;
  PRF token_f1;
  BleuScore bleu;  // sentence BLEU
  PRF rouge1;
  PRF rouge2;
  PRF rouge_su;
};

struct MetricOptions {
  int rouge_su_max_skip = 4;
};

// Scores one prediction against its golds. BLEU uses all golds as
// references; each ROUGE variant uses the gold with the best f1.
InstanceScores score_instance(std::string_view prediction, const std::vector<std::string>& golds,
                              const MetricOptions& options = {});

struct MetricReport {
  double em = 0.0;
  PRF token_f1;
  BleuScore bleu;  // macro mean of sentence BLEU
  PRF rouge1;
  PRF rouge2;
  PRF rouge_su;
  std::size_t n_instances = 0;
  std::optional<BleuScore> corpus_bleu;
};

// Arithmetic mean of every field. Throws ArgumentError on empty input.
MetricReport aggregate_report(const std::vector<InstanceScores>& per_instance);

nlohmann::json to_json(const PRF& prf);
nlohmann::json to_json(const BleuScore& bleu);
nlohmann::json to_json(const InstanceScores& scores);
nlohmann::json to_json(const MetricReport& report);

struct TableOptions {
  bool rouge_breakdown = false;  // ROUGE-1/2/SU precision, recall, F1
  bool bleu_breakdown = false;   // BLEU 1-gram .. 4-gram
  bool bleu_per_order = false;   // breakdown shows modified precisions instead of cumulative
  int bleu_order = 4;            // cumulative order shown in the main table's BLEU column
  std::string model_name = "PerkwE_COQA";
};

// Main table columns: HM (EM) | F1 | BLEU | ROUGE, where F1 is token F1 and
// ROUGE is ROUGE-1 F1.
std::string format_report_table(const MetricReport& report, const TableOptions& options = {});

}  // namespace perkwe

#endif  // PERKWE_METRICS_HPP_
