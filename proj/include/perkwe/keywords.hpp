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

#ifndef PERKWE_KEYWORDS_HPP_
#define PERKWE_KEYWORDS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "perkwe/text.hpp"

namespace perkwe {

using NodeId = std::size_t;

// Undirected co-occurrence graph. Node order is first occurrence in the token
// stream. Edges are stored once under (lower id, higher id); there are no
// self-loops and every stored weight is >= 1.
class TermGraph {
 public:
  explicit TermGraph(std::size_t window = 2) : window_(window) {}

  // Returns the id of `term`, adding it if new.
  NodeId add_node(const std::string& term, std::size_t first_position);
  // Adds `weight` to the edge a-b. Self-loops are ignored.
  void add_edge(NodeId a, NodeId b, std::uint64_t weight = 1);

  std::size_t node_count() const noexcept { return terms_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t window() const noexcept { return window_; }
  const std::string& term(NodeId id) const { return terms_.at(id); }
  std::size_t first_position(NodeId id) const { return first_positions_.at(id); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  // Id of `term`, or node_count() when absent.
  NodeId find(std::string_view term) const;
  // 0 when the nodes are not adjacent.
  std::uint64_t weight(NodeId a, NodeId b) const;
  std::uint64_t weight(std::string_view a, std::string_view b) const;
  const std::map<std::pair<NodeId, NodeId>, std::uint64_t>& edges() const noexcept {
    return edges_;
  }

 private:
  std::size_t window_;
  std::vector<std::string> terms_;
  std::vector<std::size_t> first_positions_;
  std::map<std::string, NodeId, std::less<>> index_;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> edges_;
};

struct RankConfig {
  double damping = 0.85;
  double tolerance = 1e-6;  // L1 change between iterations
  int max_iterations = 100;
  std::size_t window = 4;   // tokens co-occur iff their distance < window
  std::size_t top_k = 10;
  std::size_t min_term_length = 2;  // code points
  bool merge_phrases = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct KeywordScore {
  std::string term;
  double score = 0.0;
  std::size_t rank = 0;            // 1-based
  std::size_t first_position = 0;  // token index of first occurrence

  friend bool operator==(const KeywordScore&, const KeywordScore&) = default;
};

// Counts every pair at sequence positions i < j with j - i < window and
// different surfaces. Throws ConfigError when window < 2.
TermGraph build_cooccurrence_graph(const std::vector<Token>& tokens, std::size_t window);

struct PageRankResult {
  std::vector<double> scores;  // indexed by NodeId, sums to 1
  int iterations = 0;
  bool converged = false;
};

// Weighted PageRank by Jacobi power iteration from the uniform vector:
//   s(v) = (1-d)/N + d * sum_{u ~ v} s(u) * w(u,v) / W(u)
// Isolated nodes keep (1-d)/N each step; the fixed point is renormalized to
// sum 1 at the end.
PageRankResult weighted_pagerank(const TermGraph& graph, const RankConfig& cfg);

// Orders (score desc, first_position asc, term asc) and assigns ranks 1..n.
// Scores equal to within 1e-12 are treated as tied.
void sort_keywords(std::vector<KeywordScore>& keywords);

// normalize -> tokenize -> drop stop words, pure-digit and short tokens ->
// graph -> PageRank -> top_k. Degenerate input yields an empty list.
std::vector<KeywordScore> extract_keywords(std::string_view text, const RankConfig& cfg,
                                           const StopList& stops);

}  // namespace perkwe

#endif  // PERKWE_KEYWORDS_HPP_
