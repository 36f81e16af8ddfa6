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

#include "perkwe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

using nlohmann::json;

namespace {

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

const std::set<std::string>& clitics() {
  static const std::set<std::string> kClitics = {"و", "در", "از", "به", "را"};
  return kClitics;
}

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return counts;
}

std::size_t total(const NgramCounts& counts) {
  std::size_t n = 0;
  for (const auto& [gram, c] : counts) n += c;
  return n;
}

std::size_t clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  std::size_t m = 0;
  for (const auto& [gram, c] : candidate) {
    auto it = reference.find(gram);
    if (it != reference.end()) m += std::min(c, it->second);
  }
  return m;
}

PRF overlap_prf(const NgramCounts& candidate, const NgramCounts& reference) {
  const std::size_t cand_total = total(candidate);
  const std::size_t ref_total = total(reference);
  if (cand_total == 0 && ref_total == 0) return {1.0, 1.0, 1.0};
  if (cand_total == 0 || ref_total == 0) return {};
  const auto m = static_cast<double>(clipped_overlap(candidate, reference));
  return PRF::from(m / static_cast<double>(cand_total), m / static_cast<double>(ref_total));
}

void require_golds(const std::vector<std::string>& golds) {
  if (golds.empty()) throw ArgumentError("at least one gold answer is required");
}

std::size_t closest_length(std::size_t candidate, const std::vector<std::vector<std::string>>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& ref : refs) {
    const auto diff = [&](std::size_t len) {
      return len > candidate ? len - candidate : candidate - len;
    };
    if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
      best = ref.size();
    }
  }
  return best;
}

struct BleuStats {
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::array<std::size_t, kMaxBleuOrder> matches{};
  std::array<std::size_t, kMaxBleuOrder> totals{};
  std::array<std::size_t, kMaxBleuOrder> reference_totals{};  // effective reference n-grams

  void add(const std::vector<std::string>& candidate,
           const std::vector<std::vector<std::string>>& references, int max_n) {
    candidate_length += candidate.size();
    const std::size_t ref_len = closest_length(candidate.size(), references);
    reference_length += ref_len;
    for (int n = 1; n <= max_n; ++n) {
      const NgramCounts cand = count_ngrams(candidate, n);
      NgramCounts max_ref;
      for (const auto& ref : references) {
        for (const auto& [gram, c] : count_ngrams(ref, n)) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, c);
        }
      }
      matches[n - 1] += clipped_overlap(cand, max_ref);
      totals[n - 1] += total(cand);
      if (ref_len >= static_cast<std::size_t>(n)) reference_totals[n - 1] += ref_len - n + 1;
    }
  }

  BleuScore score(int max_n, double epsilon) const {
    BleuScore out;
    if (candidate_length == 0 && reference_length == 0) {
      out.per_order.fill(1.0);
      out.cumulative.fill(1.0);
      out.brevity_penalty = 1.0;
      return out;
    }
    if (candidate_length == 0) return out;
    if (candidate_length > reference_length) {
      out.brevity_penalty = 1.0;
    } else {
      out.brevity_penalty = std::exp(1.0 - static_cast<double>(reference_length) /
                                               static_cast<double>(candidate_length));
    }
    std::array<double, kMaxBleuOrder> smoothed{};
    for (int n = 1; n <= max_n; ++n) {
      double p;
      if (totals[n - 1] > 0) {
        p = static_cast<double>(matches[n - 1]) / static_cast<double>(totals[n - 1]);
      } else {
        p = reference_totals[n - 1] == 0 ? 1.0 : 0.0;
      }
      out.per_order[n - 1] = p;
      smoothed[n - 1] = p > 0.0 ? p : epsilon;
    }
    double log_sum = 0.0;
    bool zero = false;
    for (int n = 1; n <= max_n; ++n) {
      if (smoothed[n - 1] <= 0.0) zero = true;
      if (!zero) log_sum += std::log(smoothed[n - 1]);
      out.cumulative[n - 1] = zero ? 0.0 : out.brevity_penalty * std::exp(log_sum / n);
    }
    return out;
  }
};

void check_order(int max_n) {
  if (max_n < 1 || max_n > kMaxBleuOrder) {
    throw ArgumentError("BLEU order must lie in 1.." + std::to_string(kMaxBleuOrder));
  }
}

}  // namespace

PRF PRF::from(double precision, double recall) {
  PRF prf{precision, recall, 0.0};
  if (precision + recall > 0.0) prf.f1 = 2.0 * precision * recall / (precision + recall);
  return prf;
}

std::vector<std::string> metric_tokens(std::string_view text) { return token_surfaces(text); }

std::vector<std::string> metric_normalize(std::string_view answer) {
  std::vector<std::string> out;
  for (auto& token : token_surfaces(answer)) {
    if (!clitics().count(token)) out.push_back(std::move(token));
  }
  return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  require_golds(golds);
  const auto pred = metric_normalize(prediction);
  for (const auto& gold : golds) {
    if (metric_normalize(gold) == pred) return 1;
  }
  return 0;
}

PRF token_f1(std::string_view prediction, const std::vector<std::string>& golds) {
  require_golds(golds);
  const NgramCounts pred = count_ngrams(metric_normalize(prediction), 1);
  PRF best;
  bool first = true;
  for (const auto& gold : golds) {
    const PRF prf = overlap_prf(pred, count_ngrams(metric_normalize(gold), 1));
    if (first || prf.f1 > best.f1) best = prf;
    first = false;
  }
  return best;
}

BleuScore bleu(const std::vector<std::string>& predictions,
               const std::vector<std::vector<std::string>>& references, int max_n) {
  check_order(max_n);
  if (predictions.empty()) throw ArgumentError("BLEU needs at least one prediction");
  if (predictions.size() != references.size()) {
    throw ArgumentError("BLEU: " + std::to_string(predictions.size()) + " predictions but " +
                        std::to_string(references.size()) + " reference sets");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (references[i].empty()) throw ArgumentError("BLEU: empty reference set");
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[i]) refs.push_back(metric_tokens(r));
    stats.add(metric_tokens(predictions[i]), refs, max_n);
  }
  return stats.score(max_n, 0.0);
}

BleuScore sentence_bleu(std::string_view prediction, const std::vector<std::string>& references,
                        int max_n) {
  check_order(max_n);
  require_golds(references);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(metric_tokens(r));
  BleuStats stats;
  stats.add(metric_tokens(prediction), refs, max_n);
  return stats.score(max_n, kSentenceBleuEpsilon);
}

PRF rouge_n(std::string_view prediction, std::string_view reference, int n) {
  if (n < 1) throw ArgumentError("ROUGE-N needs n >= 1");
  return overlap_prf(count_ngrams(metric_tokens(prediction), n),
                     count_ngrams(metric_tokens(reference), n));
}

namespace {

NgramCounts su_units(const std::vector<std::string>& tokens, int max_skip) {
  NgramCounts units = count_ngrams(tokens, 1);
  const auto reach = static_cast<std::size_t>(max_skip) + 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size() && j - i <= reach; ++j) {
      ++units[{tokens[i], tokens[j]}];
    }
  }
  return units;
}

}  // namespace

PRF rouge_su(std::string_view prediction, std::string_view reference, int max_skip) {
  if (max_skip < 0) throw ArgumentError("ROUGE-SU needs max_skip >= 0");
  return overlap_prf(su_units(metric_tokens(prediction), max_skip),
                     su_units(metric_tokens(reference), max_skip));
}

InstanceScores score_instance(std::string_view prediction, const std::vector<std::string>& golds,
                              const MetricOptions& options) {
  require_golds(golds);
  InstanceScores s;
  s.em = exact_match(prediction, golds);
  s.token_f1 = token_f1(prediction, golds);
  s.bleu = sentence_bleu(prediction, golds);
  auto best = [&](auto&& metric) {
    PRF out = metric(golds.front());
    for (std::size_t i = 1; i < golds.size(); ++i) {
      const PRF prf = metric(golds[i]);
      if (prf.f1 > out.f1) out = prf;
    }
    return out;
  };
  s.rouge1 = best([&](const std::string& g) { return rouge_n(prediction, g, 1); });
  s.rouge2 = best([&](const std::string& g) { return rouge_n(prediction, g, 2); });
  s.rouge_su = best([&](const std::string& g) { return rouge_su(prediction, g, options.rouge_su_max_skip); });
  return s;
}

MetricReport aggregate_report(const std::vector<InstanceScores>& per_instance) {
  if (per_instance.empty()) throw ArgumentError("cannot aggregate an empty score list");
  MetricReport r;
  r.n_instances = per_instance.size();
  const double n = static_cast<double>(per_instance.size());
  auto add = [n](PRF& into, const PRF& x) {
    into.precision += x.precision / n;
    into.recall += x.recall / n;
    into.f1 += x.f1 / n;
  };
  for (const auto& s : per_instance) {
    r.em += s.em / n;
    add(r.token_f1, s.token_f1);
    add(r.rouge1, s.rouge1);
    add(r.rouge2, s.rouge2);
    add(r.rouge_su, s.rouge_su);
    for (int k = 0; k < kMaxBleuOrder; ++k) {
      r.bleu.per_order[k] += s.bleu.per_order[k] / n;
      r.bleu.cumulative[k] += s.bleu.cumulative[k] / n;
    }
    r.bleu.brevity_penalty += s.bleu.brevity_penalty / n;
  }
  return r;
}

json to_json(const PRF& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

json to_json(const BleuScore& bleu) {
  return {{"per_order", bleu.per_order},
          {"cumulative", bleu.cumulative},
          {"brevity_penalty", bleu.brevity_penalty}};
}

json to_json(const InstanceScores& s) {
  return {{"em", s.em},         {"token_f1", to_json(s.token_f1)}, {"bleu", to_json(s.bleu)},
          {"rouge1", to_json(s.rouge1)}, {"rouge2", to_json(s.rouge2)},
          {"rouge_su", to_json(s.rouge_su)}};
}

json to_json(const MetricReport& r) {
  json j = {{"em", r.em},
            {"token_f1", to_json(r.token_f1)},
            {"bleu", to_json(r.bleu)},
            {"rouge1", to_json(r.rouge1)},
            {"rouge2", to_json(r.rouge2)},
            {"rouge_su", to_json(r.rouge_su)},
            {"n_instances", r.n_instances}};
  if (r.corpus_bleu) j["corpus_bleu"] = to_json(*r.corpus_bleu);
  return j;
}

namespace {

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%-8.4f", v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  const std::size_t len = codepoint_length(s);
  if (len < width) out.append(width - len, ' ');
  return out;
}

std::string trim_right(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::string format_report_table(const MetricReport& report, const TableOptions& options) {
  const int order = std::clamp(options.bleu_order, 1, kMaxBleuOrder);
  const std::size_t name_width = std::max<std::size_t>(16, codepoint_length(options.model_name) + 2);
  std::string out;

  out += "MODEL EVALUATION (n=" + std::to_string(report.n_instances) + ")\n";
  out += trim_right(pad("Model /metric", name_width) + pad("HM (EM)", 9) + pad("F1", 9) +
                    pad("BLEU", 9) + "ROUGE") + "\n";
  out += trim_right(pad(options.model_name, name_width) + pad(cell(report.em), 9) +
                    pad(cell(report.token_f1.f1), 9) + pad(cell(report.bleu.cumulative[order - 1]), 9) +
                    cell(report.rouge1.f1)) + "\n";

  if (options.rouge_breakdown) {
    out += "\nMODEL EVALUATION WITH ROUGE METRIC\n";
    out += trim_right(pad("Model /metric", name_width) + pad("ROUGE-1", 27) + pad("ROUGE-2", 27) +
                      "ROUGE-SU") + "\n";
    std::string sub = pad("", name_width);
    for (int i = 0; i < 3; ++i) sub += pad("P", 9) + pad("R", 9) + pad("F1", 9);
    out += trim_right(sub) + "\n";
    std::string row = pad(options.model_name, name_width);
    for (const PRF* prf : {&report.rouge1, &report.rouge2, &report.rouge_su}) {
      row += pad(cell(prf->precision), 9) + pad(cell(prf->recall), 9) + pad(cell(prf->f1), 9);
    }
    out += trim_right(row) + "\n";
  }

  if (options.bleu_breakdown) {
    out += "\nMODEL EVALUATION WITH BLEU METRIC (";
    out += options.bleu_per_order ? "per-order precision" : "cumulative";
    out += ")\n";
    std::string head = pad("Model /metric", name_width);
    std::string row = pad(options.model_name, name_width);
    const auto& values = options.bleu_per_order ? report.bleu.per_order : report.bleu.cumulative;
    for (int n = 1; n <= kMaxBleuOrder; ++n) {
      head += pad("BLEU " + std::to_string(n) + "-gram", 14);
      row += pad(cell(values[n - 1]), 14);
    }
    out += trim_right(head) + "\n" + trim_right(row) + "\n";
  }
  return out;
}

}  // namespace perkwe
