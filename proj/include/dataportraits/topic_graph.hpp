#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dataportraits/lda.hpp"

namespace dataportraits {

// Undirected topic co-contribution graph. Edge (i, j), i < j, exists iff at
// least one user has both topics at or above epsilon; its weight is the
// fraction of all users that do.
struct TopicGraph {
  int node_count = 0;
  double epsilon = 0.01;
  std::size_t user_count = 0;
  std::map<std::pair<TopicId, TopicId>, double> edges;

  double weight(TopicId a, TopicId b) const;
  // Neighbours with weights, per node.
  std::vector<std::vector<std::pair<TopicId, double>>> adjacency() const;
};

// Throws std::invalid_argument when vectors is empty or k differs.
TopicGraph build_graph(std::span<const TopicVector> vectors, double epsilon);

enum class CentralityMethod { weighted_closeness, current_flow_closeness };

std::string_view to_string(CentralityMethod method);
CentralityMethod parse_centrality_method(std::string_view name);

// Weighted closeness uses edge length 1 / weight and Wasserman-Faust scaling
// on disconnected graphs: ((r - 1) / sum d) * ((r - 1) / (n - 1)), where r
// counts nodes reachable from v (itself included). Isolated nodes score 0.
std::vector<double> weighted_closeness(const TopicGraph& g);

// Information centrality on the largest connected component, with edge
// weights as conductances: (m - 1) / sum of effective resistances. Nodes
// outside that component score 0. Ties between largest components go to the
// one holding the smallest topic id.
std::vector<double> current_flow_closeness(const TopicGraph& g);

std::vector<double> centrality(const TopicGraph& g, CentralityMethod method);

struct IntermediaryTopicSet {
  std::vector<TopicId> topic_ids;  // ascending
  std::vector<double> centrality;  // indexed by topic id
  double threshold = 0;            // median centrality

  bool contains(TopicId t) const;
};

double median(std::vector<double> values);

// Topics with centrality >= median (inclusive, so ties at the median are kept).
IntermediaryTopicSet intermediary_topics(const TopicGraph& g, CentralityMethod method);
IntermediaryTopicSet intermediary_from_centrality(std::vector<double> centrality);

// Graph JSON: nodes, weighted edges, centralities, intermediary ids.
std::string graph_to_json(const TopicGraph& g, const IntermediaryTopicSet& itset, CentralityMethod method);
struct GraphBundle {
  TopicGraph graph;
  IntermediaryTopicSet intermediary;
  CentralityMethod method = CentralityMethod::weighted_closeness;
};
GraphBundle graph_from_json(std::string_view json_text);

}  // namespace dataportraits
