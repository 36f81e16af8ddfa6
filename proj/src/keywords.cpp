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

#include "perkwe/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "perkwe/errors.hpp"

namespace perkwe {

NodeId TermGraph::add_node(const std::string& term, std::size_t first_position) {
  auto it = index_.find(term);
  if (it != index_.end()) return it->second;
  const NodeId id = terms_.size();
  terms_.push_back(term);
  first_positions_.push_back(first_position);
  index_.emplace(term, id);
  return id;
}

void TermGraph::add_edge(NodeId a, NodeId b, std::uint64_t weight) {
  if (a == b || weight == 0) return;
  if (a >= terms_.size() || b >= terms_.size()) throw ArgumentError("edge endpoint out of range");
  edges_[{std::min(a, b), std::max(a, b)}] += weight;
}

NodeId TermGraph::find(std::string_view term) const {
  auto it = index_.find(term);
  return it == index_.end() ? terms_.size() : it->second;
}

std::uint64_t TermGraph::weight(NodeId a, NodeId b) const {
  auto it = edges_.find({std::min(a, b), std::max(a, b)});
  return it == edges_.end() ? 0 : it->second;
}

std::uint64_t TermGraph::weight(std::string_view a, std::string_view b) const {
  const NodeId ia = find(a);
  const NodeId ib = find(b);
  if (ia == node_count() || ib == node_count()) return 0;
  return weight(ia, ib);
}

void RankConfig::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("rank.damping must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw ConfigError("rank.tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("rank.max_iterations must be >= 1");
  if (window < 2) throw ConfigError("rank.window must be >= 2");
  if (top_k < 1) throw ConfigError("rank.top_k must be >= 1");
  if (min_term_length < 1) throw ConfigError("rank.min_term_length must be >= 1");
}

TermGraph build_cooccurrence_graph(const std::vector<Token>& tokens, std::size_t window) {
  if (window < 2) throw ConfigError("co-occurrence window must be >= 2");
  TermGraph graph(window);
  std::vector<NodeId> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(graph.add_node(token.surface, token.index));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t end = std::min(ids.size(), i + window);
    for (std::size_t j = i + 1; j < end; ++j) {
      if (ids[i] != ids[j]) graph.add_edge(ids[i], ids[j]);
    }
  }
  return graph;
}

PageRankResult weighted_pagerank(const TermGraph& graph, const RankConfig& cfg) {
  cfg.validate();
  PageRankResult result;
  const std::size_t n = graph.node_count();
  if (n == 0) {
    result.converged = true;
    return result;
  }

  std::vector<std::vector<std::pair<NodeId, double>>> adjacency(n);
  std::vector<double> out_weight(n, 0.0);
  for (const auto& [edge, w] : graph.edges()) {
    const double weight = static_cast<double>(w);
    adjacency[edge.first].emplace_back(edge.second, weight);
    adjacency[edge.second].emplace_back(edge.first, weight);
    out_weight[edge.first] += weight;
    out_weight[edge.second] += weight;
  }

  const double d = cfg.damping;
  const double teleport = (1.0 - d) / static_cast<double>(n);
  std::vector<double> current(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    for (NodeId v = 0; v < n; ++v) {
      double inflow = 0.0;
      for (const auto& [u, w] : adjacency[v]) inflow += current[u] * w / out_weight[u];
      next[v] = teleport + d * inflow;
    }
    double change = 0.0;
    for (NodeId v = 0; v < n; ++v) change += std::abs(next[v] - current[v]);
    current.swap(next);
    result.iterations = iter;
    if (change < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }

  double total = 0.0;
  for (double s : current) total += s;
  for (double& s : current) s /= total;
  result.scores = std::move(current);
  return result;
}

void sort_keywords(std::vector<KeywordScore>& keywords) {
  auto bucket = [](double score) { return std::llround(score * 1e12); };
  std::sort(keywords.begin(), keywords.end(), [&](const KeywordScore& a, const KeywordScore& b) {
    const auto ka = bucket(a.score);
    const auto kb = bucket(b.score);
    if (ka != kb) return ka > kb;
    if (a.first_position != b.first_position) return a.first_position < b.first_position;
    return a.term < b.term;
  });
  for (std::size_t i = 0; i < keywords.size(); ++i) keywords[i].rank = i + 1;
}

namespace {

// Joins runs of selected terms that sit next to each other in the candidate
// stream (consecutive original token indices) into phrases.
std::vector<KeywordScore> merge_adjacent(const std::vector<Token>& candidates,
                                         const std::vector<KeywordScore>& selected) {
  std::unordered_map<std::string, const KeywordScore*> by_term;
  for (const auto& kw : selected) by_term.emplace(kw.term, &kw);

  std::vector<KeywordScore> phrases;
  std::set<std::string> seen_phrases;
  std::set<std::string> standalone;
  std::size_t i = 0;
  while (i < candidates.size()) {
    if (!by_term.count(candidates[i].surface)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < candidates.size() && by_term.count(candidates[j].surface) &&
           candidates[j].index == candidates[j - 1].index + 1) {
      ++j;
    }
    if (j - i == 1) {
      standalone.insert(candidates[i].surface);
    } else {
      KeywordScore phrase;
      phrase.first_position = candidates[i].index;
      for (std::size_t k = i; k < j; ++k) {
        if (k > i) phrase.term += ' ';
        phrase.term += candidates[k].surface;
        phrase.score = std::max(phrase.score, by_term.at(candidates[k].surface)->score);
      }
      if (seen_phrases.insert(phrase.term).second) phrases.push_back(std::move(phrase));
    }
    i = j;
  }

  std::vector<KeywordScore> merged;
  for (const auto& kw : selected) {
    if (standalone.count(kw.term)) merged.push_back(kw);
  }
  merged.insert(merged.end(), phrases.begin(), phrases.end());
  sort_keywords(merged);
  return merged;
}

}  // namespace

std::vector<KeywordScore> extract_keywords(std::string_view text, const RankConfig& cfg,
                                           const StopList& stops) {
  cfg.validate();
  std::vector<Token> candidates;
  for (auto& token : filter_stopwords(tokenize(normalize_text(text)), stops)) {
    if (is_all_digits(token.surface)) continue;
    if (codepoint_length(token.surface) < cfg.min_term_length) continue;
    candidates.push_back(std::move(token));
  }
  if (candidates.empty()) return {};

  const TermGraph graph = build_cooccurrence_graph(candidates, cfg.window);
  const PageRankResult ranked = weighted_pagerank(graph, cfg);

  std::vector<KeywordScore> keywords;
  keywords.reserve(graph.node_count());
  for (NodeId id = 0; id < graph.node_count(); ++id) {
    keywords.push_back({graph.term(id), ranked.scores[id], 0, graph.first_position(id)});
  }
  sort_keywords(keywords);
  if (keywords.size() > cfg.top_k) keywords.resize(cfg.top_k);

  if (cfg.merge_phrases) {
    keywords = merge_adjacent(candidates, keywords);
    if (keywords.size() > cfg.top_k) keywords.resize(cfg.top_k);
  }
  return keywords;
}

}  // namespace perkwe
