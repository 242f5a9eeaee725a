#include <gtest/gtest.h>

#include <random>

#include "dataportraits/topic_graph.hpp"
#include "oracles.hpp"

using namespace dataportraits;

namespace {

TopicVector vec(std::vector<double> p) { return {"u", std::move(p)}; }

TopicGraph graph_from_matrix(const oracle::Matrix& w) {
  TopicGraph g;
  g.node_count = static_cast<int>(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (w[i][j] > 0) g.edges[{static_cast<TopicId>(i), static_cast<TopicId>(j)}] = w[i][j];
  return g;
}

oracle::Matrix random_matrix(std::mt19937_64& gen, std::size_t n, double density) {
  std::uniform_real_distribution<double> u(0, 1), weight(0.01, 1.0);
  oracle::Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(gen) < density) w[i][j] = w[j][i] = weight(gen);
  return w;
}

oracle::Matrix path3(double w01, double w12) {
  return {{0, w01, 0}, {w01, 0, w12}, {0, w12, 0}};
}

}  // namespace

TEST(BuildGraph, SingleUserTwoTopics) {
  const std::vector<TopicVector> v{vec({0.5, 0.495, 0.005})};
  const auto g = build_graph(v, 0.01);
  EXPECT_EQ(g.node_count, 3);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.weight(0, 2), 0.0);
  EXPECT_TRUE(g.adjacency()[2].empty());
}

TEST(BuildGraph, TwoUsersOverlappingPairs) {
  const std::vector<TopicVector> v{vec({0.6, 0.395, 0.005}), vec({0.005, 0.5, 0.495})};
  const auto g = build_graph(v, 0.01);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.weight(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(g.weight(2, 1), 0.5);
  EXPECT_EQ(g.weight(0, 2), 0.0);
}

TEST(BuildGraph, NoCoContributionNoEdges) {
  const std::vector<TopicVector> v{vec({0.995, 0.005}), vec({0.005, 0.995})};
  EXPECT_TRUE(build_graph(v, 0.01).edges.empty());
}

TEST(BuildGraph, Errors) {
  EXPECT_THROW(build_graph(std::vector<TopicVector>{}, 0.01), std::invalid_argument);
  const std::vector<TopicVector> v{vec({0.5, 0.5}), vec({0.2, 0.3, 0.5})};
  EXPECT_THROW(build_graph(v, 0.01), std::invalid_argument);
}

TEST(BuildGraph, MatchesPairCountOracle) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0, 1);
  const int k = 8;
  std::vector<TopicVector> users;
  for (int i = 0; i < 60; ++i) {
    std::vector<double> p(k);
    double total = 0;
    for (auto& x : p) total += (x = u(gen) < 0.4 ? u(gen) : 1e-4);
    for (auto& x : p) x /= total;
    users.push_back(vec(p));
  }
  const double eps = 0.05;
  const auto g = build_graph(users, eps);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      int both = 0;
      for (const auto& v : users) both += v.probs[a] >= eps && v.probs[b] >= eps;
      EXPECT_DOUBLE_EQ(g.weight(a, b), both / 60.0);
    }
  }
}

TEST(Closeness, PathSymmetry) {
  const auto c = weighted_closeness(graph_from_matrix(path3(1, 1)));
  EXPECT_GT(c[1], c[0]);
  EXPECT_DOUBLE_EQ(c[0], c[2]);
}

TEST(Closeness, HalfWeightPath) {
  const auto c = weighted_closeness(graph_from_matrix(path3(0.5, 0.5)));
  EXPECT_NEAR(c[1], 0.5, 1e-15);
  EXPECT_NEAR(c[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c[2], 1.0 / 3.0, 1e-15);
}

TEST(Closeness, DisconnectedScaling) {
  // Edge 0-1 of weight 1 plus isolated node 2: each endpoint reaches one of
  // two others at distance 1, so (1/1) * (1/2).
  oracle::Matrix w{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}};
  const auto c = weighted_closeness(graph_from_matrix(w));
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
  EXPECT_DOUBLE_EQ(c[2], 0.0);
}

TEST(Closeness, MatchesFloydWarshallOnRandomGraphs) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  std::uniform_real_distribution<double> density(0.1, 0.9);
  for (int trial = 0; trial < 150; ++trial) {
    const auto w = random_matrix(gen, size(gen), density(gen));
    const auto got = weighted_closeness(graph_from_matrix(w));
    const auto want = oracle::closeness(w);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9) << "trial " << trial;
    const auto set = intermediary_from_centrality(got);
    EXPECT_EQ(set.topic_ids, oracle::top_half(want)) << "trial " << trial;
  }
}

TEST(Closeness, ScaleInvariantRanking) {
  // Scaling all weights scales every closeness by the same factor.
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto w = random_matrix(gen, 9, 0.5);
    const auto a = weighted_closeness(graph_from_matrix(w));
    for (auto& row : w)
      for (auto& x : row) x *= 0.25;
    const auto b = weighted_closeness(graph_from_matrix(w));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] * 0.25, 1e-12);
  }
}

TEST(Closeness, HeavierEdgeDoesNotLowerCentrality) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto w = random_matrix(gen, 8, 0.6);
    const auto before = weighted_closeness(graph_from_matrix(w));
    for (std::size_t j = 1; j < 8; ++j)
      if (w[0][j] > 0) w[0][j] = w[j][0] = w[0][j] * 2;
    const auto after = weighted_closeness(graph_from_matrix(w));
    EXPECT_GE(after[0], before[0] - 1e-12);
  }
}

TEST(CurrentFlow, PathGraph) {
  // Unit path a-b-c: resistances from b are 1, 1; from a are 1, 2.
  const auto c = current_flow_closeness(graph_from_matrix(path3(1, 1)));
  EXPECT_NEAR(c[1], 2.0 / 2.0, 1e-12);
  EXPECT_NEAR(c[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(c[2], 2.0 / 3.0, 1e-12);
}

TEST(CurrentFlow, TreesMatchPathResistance) {
  // On a tree the effective resistance is the sum of 1/w along the path, the
  // same as the weighted shortest path.
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 10;
    oracle::Matrix w(n, std::vector<double>(n, 0.0));
    for (std::size_t v = 1; v < n; ++v) {
      const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(gen);
      w[v][parent] = w[parent][v] = weight(gen);
    }
    const auto d = oracle::all_pairs(w);
    const auto c = current_flow_closeness(graph_from_matrix(w));
    for (std::size_t v = 0; v < n; ++v) {
      double total = 0;
      for (std::size_t u = 0; u < n; ++u) total += d[v][u];
      EXPECT_NEAR(c[v], (n - 1) / total, 1e-9);
    }
  }
}

TEST(CurrentFlow, MatchesKirchhoffOracle) {
  std::mt19937_64 gen(99);
  int checked = 0;
  while (checked < 60) {
    const std::size_t n = 2 + gen() % 11;
    const auto w = random_matrix(gen, n, 0.7);
    // Keep connected graphs only; the oracle solves one component.
    const auto d = oracle::all_pairs(w);
    bool connected = true;
    for (std::size_t u = 0; u < n; ++u) connected = connected && std::isfinite(d[0][u]);
    if (!connected) continue;
    ++checked;
    const auto c = current_flow_closeness(graph_from_matrix(w));
    for (std::size_t v = 0; v < n; ++v) {
      double total = 0;
      for (std::size_t u = 0; u < n; ++u) total += oracle::effective_resistance(w, v, u);
      EXPECT_NEAR(c[v], (n - 1) / total, 1e-9);
    }
  }
}

TEST(CurrentFlow, OnlyLargestComponentScores) {
  // Triangle {0,1,2} and an edge {3,4}.
  oracle::Matrix w(5, std::vector<double>(5, 0.0));
  w[0][1] = w[1][0] = w[1][2] = w[2][1] = w[0][2] = w[2][0] = 1;
  w[3][4] = w[4][3] = 1;
  const auto c = current_flow_closeness(graph_from_matrix(w));
  EXPECT_GT(c[0], 0);
  EXPECT_DOUBLE_EQ(c[3], 0);
  EXPECT_DOUBLE_EQ(c[4], 0);
  // Two equal components: the one holding topic 0 wins.
  oracle::Matrix two(4, std::vector<double>(4, 0.0));
  two[0][3] = two[3][0] = 1;
  two[1][2] = two[2][1] = 1;
  const auto t = current_flow_closeness(graph_from_matrix(two));
  EXPECT_GT(t[0], 0);
  EXPECT_GT(t[3], 0);
  EXPECT_DOUBLE_EQ(t[1], 0);
}

TEST(Intermediary, HandMedian) {
  const auto s = intermediary_from_centrality({0.9, 0.5, 0.1, 0.1});
  EXPECT_DOUBLE_EQ(s.threshold, 0.3);
  EXPECT_EQ(s.topic_ids, (std::vector<TopicId>{0, 1}));
  EXPECT_TRUE(s.contains(0));
  EXPECT_FALSE(s.contains(2));
}

TEST(Intermediary, AllEqual) {
  const auto s = intermediary_from_centrality({0.2, 0.2, 0.2});
  EXPECT_EQ(s.topic_ids, (std::vector<TopicId>{0, 1, 2}));
}

TEST(Intermediary, OddCountKeepsMedianTopic) {
  const auto s = intermediary_from_centrality({0.1, 0.3, 0.2});
  EXPECT_EQ(s.topic_ids, (std::vector<TopicId>{1, 2}));
}

TEST(Intermediary, StarHubAlwaysIncluded) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 9;
    const std::size_t hub = trial % n;
    oracle::Matrix w(n, std::vector<double>(n, 0.0));
    for (std::size_t v = 0; v < n; ++v)
      if (v != hub) w[v][hub] = w[hub][v] = weight(gen);
    const auto g = graph_from_matrix(w);
    for (auto method : {CentralityMethod::weighted_closeness, CentralityMethod::current_flow_closeness})
      EXPECT_TRUE(intermediary_topics(g, method).contains(static_cast<TopicId>(hub)));
  }
}

TEST(Intermediary, Median) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(GraphJson, RoundTrip) {
  const std::vector<TopicVector> v{vec({0.6, 0.395, 0.005}), vec({0.005, 0.5, 0.495})};
  const auto g = build_graph(v, 0.01);
  const auto s = intermediary_topics(g, CentralityMethod::current_flow_closeness);
  const auto text = graph_to_json(g, s, CentralityMethod::current_flow_closeness);
  const auto back = graph_from_json(text);
  EXPECT_EQ(back.method, CentralityMethod::current_flow_closeness);
  EXPECT_EQ(back.graph.edges, g.edges);
  EXPECT_EQ(back.intermediary.topic_ids, s.topic_ids);
  EXPECT_EQ(back.intermediary.centrality, s.centrality);
  EXPECT_EQ(back.graph.user_count, 2u);
  EXPECT_THROW(graph_from_json("{}"), std::exception);
}

TEST(CentralityMethodNames, Parse) {
  EXPECT_EQ(parse_centrality_method("weighted_closeness"), CentralityMethod::weighted_closeness);
  EXPECT_EQ(parse_centrality_method("current_flow_closeness"), CentralityMethod::current_flow_closeness);
  EXPECT_THROW(parse_centrality_method("pagerank"), std::invalid_argument);
}
