#include "dataportraits/topic_graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

namespace dataportraits {
namespace {

using nlohmann::json;

// Relative slack for the median comparison, so that topics whose centrality
// differs from the median only by summation-order rounding count as ties.
constexpr double kTieTolerance = 1e-12;

std::vector<double> dijkstra(const std::vector<std::vector<std::pair<TopicId, double>>>& adj, TopicId source) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(adj.size(), inf);
  using Item = std::pair<double, TopicId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
      const double nd = d + 1.0 / w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

std::vector<int> components(const std::vector<std::vector<std::pair<TopicId, double>>>& adj) {
  std::vector<int> label(adj.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (label[s] != -1) continue;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : adj[u]) {
        if (label[static_cast<std::size_t>(v)] == -1) {
          label[static_cast<std::size_t>(v)] = next;
          stack.push_back(static_cast<std::size_t>(v));
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace

double TopicGraph::weight(TopicId a, TopicId b) const {
  if (a > b) std::swap(a, b);
  const auto it = edges.find({a, b});
  return it == edges.end() ? 0.0 : it->second;
}

std::vector<std::vector<std::pair<TopicId, double>>> TopicGraph::adjacency() const {
  std::vector<std::vector<std::pair<TopicId, double>>> adj(static_cast<std::size_t>(node_count));
  for (const auto& [e, w] : edges) {
    adj[static_cast<std::size_t>(e.first)].emplace_back(e.second, w);
    adj[static_cast<std::size_t>(e.second)].emplace_back(e.first, w);
  }
  return adj;
}

TopicGraph build_graph(std::span<const TopicVector> vectors, double epsilon) {
  if (vectors.empty()) throw std::invalid_argument("topic graph needs at least one topic vector");
  const std::size_t k = vectors.front().probs.size();
  TopicGraph g;
  g.node_count = static_cast<int>(k);
  g.epsilon = epsilon;
  g.user_count = vectors.size();
  std::map<std::pair<TopicId, TopicId>, std::size_t> counts;
  for (const auto& v : vectors) {
    if (v.probs.size() != k) throw std::invalid_argument("topic vectors disagree on k");
    const auto sig = significant_topics(v, epsilon);
    for (std::size_t a = 0; a < sig.size(); ++a)
      for (std::size_t b = a + 1; b < sig.size(); ++b) ++counts[{sig[a], sig[b]}];
  }
  const auto users = static_cast<double>(vectors.size());
  for (const auto& [e, c] : counts) g.edges.emplace(e, static_cast<double>(c) / users);
  return g;
}

std::string_view to_string(CentralityMethod method) {
  switch (method) {
    case CentralityMethod::weighted_closeness: return "weighted_closeness";
    case CentralityMethod::current_flow_closeness: return "current_flow_closeness";
  }
  return "weighted_closeness";
}

CentralityMethod parse_centrality_method(std::string_view name) {
  if (name == "weighted_closeness") return CentralityMethod::weighted_closeness;
  if (name == "current_flow_closeness") return CentralityMethod::current_flow_closeness;
  throw std::invalid_argument("unknown centrality method: " + std::string(name));
}

std::vector<double> weighted_closeness(const TopicGraph& g) {
  const auto n = static_cast<std::size_t>(g.node_count);
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto adj = g.adjacency();
  for (std::size_t v = 0; v < n; ++v) {
    const auto dist = dijkstra(adj, static_cast<TopicId>(v));
    double sum = 0;
    std::size_t reachable = 0;
    for (double d : dist) {
      if (std::isfinite(d)) {
        sum += d;
        ++reachable;
      }
    }
    if (reachable <= 1 || sum <= 0) continue;
    const double r1 = static_cast<double>(reachable - 1);
    out[v] = (r1 / sum) * (r1 / static_cast<double>(n - 1));
  }
  return out;
}

std::vector<double> current_flow_closeness(const TopicGraph& g) {
  const auto n = static_cast<std::size_t>(g.node_count);
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto adj = g.adjacency();
  const auto label = components(adj);
  const int count = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int l : label) ++sizes[static_cast<std::size_t>(l)];
  // Labels are assigned in node order, so the first maximum holds the smallest id.
  const auto largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<std::size_t> nodes;
  std::vector<std::ptrdiff_t> local(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (label[v] == largest) {
      local[v] = static_cast<std::ptrdiff_t>(nodes.size());
      nodes.push_back(v);
    }
  }
  const auto m = static_cast<Eigen::Index>(nodes.size());
  if (m < 2) return out;

  // (L + J/m)^-1 shares the pseudo-inverse's effective resistances.
  Eigen::MatrixXd lap = Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  for (const auto& [e, w] : g.edges) {
    const auto a = local[static_cast<std::size_t>(e.first)];
    const auto b = local[static_cast<std::size_t>(e.second)];
    if (a < 0) continue;
    lap(a, a) += w;
    lap(b, b) += w;
    lap(a, b) -= w;
    lap(b, a) -= w;
  }
  const Eigen::MatrixXd c = lap.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
  for (Eigen::Index i = 0; i < m; ++i) {
    double total = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) total += c(i, i) + c(j, j) - 2.0 * c(i, j);
    }
    out[nodes[static_cast<std::size_t>(i)]] = static_cast<double>(m - 1) / total;
  }
  return out;
}

std::vector<double> centrality(const TopicGraph& g, CentralityMethod method) {
  if (g.node_count == 0) return {};
  switch (method) {
    case CentralityMethod::weighted_closeness: return weighted_closeness(g);
    case CentralityMethod::current_flow_closeness: return current_flow_closeness(g);
  }
  throw std::invalid_argument("unknown centrality method");
}

bool IntermediaryTopicSet::contains(TopicId t) const {
  return std::binary_search(topic_ids.begin(), topic_ids.end(), t);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return values[mid - 1] + (values[mid] - values[mid - 1]) / 2.0;
}

IntermediaryTopicSet intermediary_from_centrality(std::vector<double> centrality) {
  IntermediaryTopicSet out;
  out.centrality = std::move(centrality);
  if (out.centrality.empty()) return out;
  out.threshold = median(out.centrality);
  const double cut = out.threshold - kTieTolerance * std::max(1.0, std::abs(out.threshold));
  for (std::size_t t = 0; t < out.centrality.size(); ++t) {
    if (out.centrality[t] >= cut) out.topic_ids.push_back(static_cast<TopicId>(t));
  }
  return out;
}

IntermediaryTopicSet intermediary_topics(const TopicGraph& g, CentralityMethod method) {
  return intermediary_from_centrality(centrality(g, method));
}

std::string graph_to_json(const TopicGraph& g, const IntermediaryTopicSet& itset, CentralityMethod method) {
  json j;
  j["format"] = "dataportraits.topic_graph";
  j["version"] = 1;
  j["epsilon"] = g.epsilon;
  j["user_count"] = g.user_count;
  j["method"] = std::string(to_string(method));
  json nodes = json::array();
  for (int t = 0; t < g.node_count; ++t) {
    json node = {{"id", t}, {"centrality", itset.centrality.empty() ? 0.0 : itset.centrality[static_cast<std::size_t>(t)]},
                 {"intermediary", itset.contains(t)}};
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [e, w] : g.edges) edges.push_back({{"source", e.first}, {"target", e.second}, {"weight", w}});
  j["edges"] = std::move(edges);
  j["median_centrality"] = itset.threshold;
  j["intermediary_topics"] = itset.topic_ids;
  return j.dump(2);
}

GraphBundle graph_from_json(std::string_view json_text) {
  const json j = json::parse(json_text);
  if (j.value("format", std::string{}) != "dataportraits.topic_graph")
    throw std::runtime_error("not a topic graph document");
  GraphBundle b;
  b.method = parse_centrality_method(j.at("method").get<std::string>());
  b.graph.epsilon = j.at("epsilon").get<double>();
  b.graph.user_count = j.at("user_count").get<std::size_t>();
  const auto& nodes = j.at("nodes");
  b.graph.node_count = static_cast<int>(nodes.size());
  b.intermediary.centrality.resize(nodes.size());
  for (const auto& node : nodes) {
    const int id = node.at("id").get<int>();
    if (id < 0 || id >= b.graph.node_count) throw std::runtime_error("node id out of range");
    b.intermediary.centrality[static_cast<std::size_t>(id)] = node.at("centrality").get<double>();
  }
  for (const auto& e : j.at("edges")) {
    TopicId a = e.at("source").get<int>();
    TopicId c = e.at("target").get<int>();
    if (a > c) std::swap(a, c);
    b.graph.edges[{a, c}] = e.at("weight").get<double>();
  }
  b.intermediary.threshold = j.at("median_centrality").get<double>();
  b.intermediary.topic_ids = j.at("intermediary_topics").get<std::vector<TopicId>>();
  std::sort(b.intermediary.topic_ids.begin(), b.intermediary.topic_ids.end());
  return b;
}

}  // namespace dataportraits
