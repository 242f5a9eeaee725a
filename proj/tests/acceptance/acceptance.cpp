// Acceptance suite: one PASS/FAIL line per primary criterion, non-zero exit
// if any fails. Numeric references come from the independent oracles in
// oracles.hpp, never from the library under test.

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "dataportraits/experiment.hpp"
#include "dataportraits/lda.hpp"
#include "dataportraits/portrait.hpp"
#include "dataportraits/recommender.hpp"
#include "dataportraits/synth.hpp"
#include "dataportraits/topic_graph.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dataportraits;
using nlohmann::json;

namespace {

// Collects failures for one criterion; the first few are reported.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": got " << got << ", want " << want;
      failures.push_back(os.str());
    }
  }
};

// ---------------------------------------------------------------------------
// 1. Diversity separation on the default planted corpus.

void diversity(Check& c) {
  const synth::SynthSpec spec;
  const auto cfg = synth::default_evaluation_config();
  c.expect(spec.users_per_community * 2 == 200, "default spec has 200 users");
  c.expect(std::fabs(spec.shared_weight - 0.4) < 1e-12, "default shared weight is 0.4");
  c.expect(cfg.model.k == 20 && cfg.rec.top_n == 10 && cfg.rec.gamma == 1.0, "k = 20, top-10, gamma = 1");

  const auto start = std::chrono::steady_clock::now();
  double it = 0, kld = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto trial = synth::run_trial(spec, cfg, static_cast<std::uint64_t>(seed));
    it += trial.it.cross_fraction;
    kld += trial.kld.cross_fraction;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  it /= seeds;
  kld /= seeds;
  std::ostringstream os;
  os.precision(4);
  os << "mean cross-community IT " << it << ", KLD " << kld << ", gap " << it - kld << ", " << secs << " s";
  c.detail = os.str();
  c.expect(it - kld >= 0.15, "gap >= 0.15");
  c.expect(secs < 300, "runtime under 5 minutes");
}

// ---------------------------------------------------------------------------
// 2. Formula oracles.

std::vector<double> random_distribution(std::mt19937_64& gen, std::size_t k) {
  std::gamma_distribution<double> g(0.3, 1.0);
  std::vector<double> v(k);
  double sum = 0;
  for (auto& x : v) sum += (x = g(gen) + 1e-6);
  for (auto& x : v) x /= sum;
  return v;
}

std::vector<int> random_set(std::mt19937_64& gen, int universe) {
  std::bernoulli_distribution pick(0.4);
  std::vector<int> out;
  for (int i = 0; i < universe; ++i)
    if (pick(gen)) out.push_back(i);
  return out;
}

void formulas(Check& c) {
  std::mt19937_64 gen(20151);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  std::uniform_real_distribution<double> unit(0, 1), gam(0.05, 10);
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = dim(gen);
    const auto a = random_distribution(gen, k), b = random_distribution(gen, k);
    c.near(kld_symmetric(a, b), oracle::kld_symmetric(a, b), 1e-9, "kld_symmetric random #" + std::to_string(i));
    c.near(kld_symmetric(a, b), kld_symmetric(b, a), 1e-12, "kld_symmetric symmetry #" + std::to_string(i));

    std::vector<double> d(dim(gen));
    for (auto& x : d) x = unit(gen) * 10;
    if (i % 7 == 0) d[0] = 0;
    const auto got = normalize_distances(d), want = oracle::normalize(d);
    for (std::size_t j = 0; j < d.size(); ++j)
      c.near(got[j], want[j], 1e-9, "normalize_distances random #" + std::to_string(i));

    const auto sa = random_set(gen, 12), sb = random_set(gen, 12);
    c.near(jaccard(sa, sb), oracle::jaccard(sa, sb), 1e-9, "jit random #" + std::to_string(i));

    const double s = unit(gen), dd = unit(gen), g = gam(gen);
    c.near(fscore(s, dd, g), oracle::fscore(s, dd, g), 1e-9, "fscore random #" + std::to_string(i));
  }

  // Boundary cases from the operation examples, compared exactly.
  const std::vector<double> p{0.75, 0.25}, q{0.25, 0.75};
  c.expect(kld_symmetric(p, p) == 0.0, "kld identical vectors is 0");
  c.near(kld_symmetric(p, q), std::log(3.0), 1e-15, "kld [0.75,0.25] vs [0.25,0.75] is ln 3");
  c.expect(normalize_distances(std::vector<double>{0, 2, 4}) == std::vector<double>{0, 0.5, 1}, "normalize [0,2,4]");
  c.expect(normalize_distances(std::vector<double>{0, 0, 0}) == std::vector<double>{0, 0, 0}, "normalize [0,0,0]");
  c.expect(normalize_distances(std::vector<double>{7}) == std::vector<double>{1}, "normalize [7]");
  const std::vector<TopicId> s123{1, 2, 3}, s234{2, 3, 4}, s56{5, 6}, empty;
  c.expect(jaccard(s123, s123) == 1.0, "jit identical sets");
  c.expect(jaccard(s123, s56) == 0.0, "jit disjoint sets");
  c.expect(jaccard(s123, s234) == 0.5, "jit {1,2,3} vs {2,3,4}");
  c.expect(jaccard(empty, empty) == 0.0, "jit both empty");
  for (double g : {0.1, 0.5, 1.0, 2.0, 7.0}) {
    c.expect(fscore(1, 0, g) == 1.0, "fscore S=1 D=0");
    for (double d : {0.0, 0.3, 1.0}) c.expect(fscore(0, d, g) == 0.0, "fscore S=0");
  }
  c.expect(fscore(0.5, 0.5, 1) == 0.5, "fscore S=0.5 D=0.5 gamma=1");
  for (double s : {0.2, 0.5, 0.8})
    for (double d : {0.1, 0.5, 0.9}) {
      c.near(fscore(s, d, 1e-4), 1 - d, 1e-6, "fscore gamma -> 0");
      c.near(fscore(s, d, 1e4), s, 1e-6, "fscore gamma -> inf");
    }
  c.detail = std::to_string(n) + " random inputs per formula, boundary cases exact";
}

// ---------------------------------------------------------------------------
// 3. Centrality against all-pairs shortest paths.

void centrality_oracle(Check& c) {
  std::mt19937_64 gen(777);
  std::uniform_int_distribution<int> nodes(1, 12);
  std::uniform_real_distribution<double> density(0.1, 0.9), weight(0.01, 1.0);
  int connected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nodes(gen);
    const double p = density(gen);
    std::bernoulli_distribution edge(p);
    TopicGraph g;
    g.node_count = n;
    oracle::Matrix w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(gen)) {
          // Weights are user fractions; quantize to make exact ties occur.
          const double x = trial % 3 == 0 ? std::ceil(weight(gen) * 4) / 4 : weight(gen);
          g.edges[{i, j}] = x;
          w[i][j] = w[j][i] = x;
        }
    const auto d = oracle::all_pairs(w);
    bool all_reachable = true;
    for (int j = 1; j < n; ++j) all_reachable = all_reachable && std::isfinite(d[0][j]);
    connected += all_reachable;

    const auto got = weighted_closeness(g);
    const auto want = oracle::closeness(w);
    for (int v = 0; v < n; ++v)
      c.near(got[v], want[v], 1e-9, "closeness graph " + std::to_string(trial) + " node " + std::to_string(v));
    const auto itset = intermediary_topics(g, CentralityMethod::weighted_closeness);
    c.expect(itset.topic_ids == oracle::top_half(want), "intermediary set graph " + std::to_string(trial));
  }
  // Hand example: path with weights 0.5, 0.5.
  TopicGraph path;
  path.node_count = 3;
  path.edges[{0, 1}] = 0.5;
  path.edges[{1, 2}] = 0.5;
  const auto cl = weighted_closeness(path);
  c.near(cl[1], 0.5, 1e-15, "path centre");
  c.near(cl[0], 1.0 / 3.0, 1e-15, "path end");
  c.expect(intermediary_from_centrality({0.9, 0.5, 0.1, 0.1}).topic_ids == std::vector<TopicId>{0, 1},
           "median example [0.9, 0.5, 0.1, 0.1]");
  c.detail = "100 random graphs (" + std::to_string(connected) + " connected), up to 12 nodes";
}

// ---------------------------------------------------------------------------
// 4. LDA on the disjoint-vocabulary fixture.

void lda(Check& c) {
  const std::vector<std::string> vocab{"a", "b", "x", "y"};
  const std::vector<TrainingDocument> docs{{"d0", {{0, 30}, {1, 30}}}, {"d1", {{2, 30}, {3, 30}}}};
  const std::map<std::string, int> truth{{"d0", 0}, {"d1", 1}};
  auto config = [](std::uint64_t seed) {
    ModelConfig m;
    m.k = 2;
    m.alpha = 0.1;
    m.iterations = 200;
    m.burn_in = 50;
    m.rng_seed = seed;
    return m;
  };
  int pure = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    int sweeps = 0;
    bool conserved = true;
    TrainOptions opts;
    opts.on_sweep = [&](const SweepStats& s) {
      ++sweeps;
      conserved = conserved && s.total_assignments == s.total_tokens && s.total_tokens == 120;
    };
    const auto model = train(docs, vocab, config(seed), opts).model;
    c.expect(sweeps == 200, "200 sweeps reported, seed " + std::to_string(seed));
    c.expect(conserved, "count conservation every sweep, seed " + std::to_string(seed));

    // Purity: per argmax topic, the share of documents from its majority class.
    std::map<TopicId, std::map<int, int>> by_topic;
    for (const auto& [id, cls] : truth) ++by_topic[model.doc_vector(id)->dominant_topic()][cls];
    int majority = 0;
    for (const auto& [t, classes] : by_topic) {
      int best = 0;
      for (const auto& [cls, count] : classes) best = std::max(best, count);
      majority += best;
    }
    const double purity = static_cast<double>(majority) / static_cast<double>(truth.size());
    c.expect(purity == 1.0, "purity 1.0, seed " + std::to_string(seed));
    pure += purity == 1.0;
  }
  const auto first = serialize_model(train(docs, vocab, config(42)).model);
  const auto second = serialize_model(train(docs, vocab, config(42)).model);
  c.expect(!first.empty() && first == second, "fixed seed gives a bit-identical model");
  c.detail = "purity 1.0 on " + std::to_string(pure) + "/5 seeds, model " + std::to_string(first.size()) + " bytes";
}

// ---------------------------------------------------------------------------
// 5. Portrait arithmetic.

const TimestampMs kGeneratedAt = parse_timestamp_ms("2015-06-01T00:00:00Z");

// Distinct non-stopword pseudo-words.
std::string pseudo_word(int i) {
  static const char* syllables[] = {"ka", "lo", "mi", "ru", "te", "vo", "ne", "pa"};
  return std::string("zq") + syllables[i % 8] + syllables[(i / 8) % 8] + syllables[(i / 64) % 8];
}

void portrait(Check& c) {
  const std::map<std::size_t, std::size_t> hand{{1, 1}, {2, 2}, {10, 5}, {100, 8}, {1000, 11}};
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> offset(0, 30 * 86400);
  for (const auto& [n, bins] : hand) {
    c.expect(sturges_bin_count(n) == bins, "sturges(" + std::to_string(n) + ")");
    std::vector<TweetRecord> tweets;
    for (std::size_t i = 0; i < n; ++i) {
      auto t = fixtures::tweet(std::to_string(i), "u", pseudo_word(static_cast<int>(i % 300)), "2015-05-01T00:00:00Z");
      t.created_at += std::chrono::seconds(offset(gen));
      tweets.push_back(std::move(t));
    }
    const Corpus corpus(std::move(tweets), Tokenizer(StopwordList::builtin()));
    const auto p = build_portrait(*corpus.document("u"), corpus, PoliticalKeywords(), kGeneratedAt);
    c.expect(p.bins.size() == bins, "bin count for n = " + std::to_string(n));
    std::size_t total = 0;
    for (const auto& b : p.bins) total += b.count;
    c.expect(total == n, "bin counts sum to n = " + std::to_string(n));
  }

  // The keyword ranks first, ranks 61st, or is absent.
  const PoliticalKeywords keywords({"#elecciones"});
  auto political_with = [&](int keyword_repeats) {
    std::vector<TweetRecord> tweets;
    int id = 0;
    for (int w = 0; w < 60; ++w)
      for (int r = 0; r < 3; ++r)
        tweets.push_back(fixtures::tweet(std::to_string(id++), "u", pseudo_word(w), "2015-05-01T00:00:00Z"));
    for (int r = 0; r < keyword_repeats; ++r)
      tweets.push_back(fixtures::tweet(std::to_string(id++), "u", "#Elecciones", "2015-05-02T00:00:00Z"));
    const Corpus corpus(std::move(tweets), Tokenizer(StopwordList::builtin()));
    const auto p = build_portrait(*corpus.document("u"), corpus, keywords, kGeneratedAt);
    std::vector<InterestToken> interests;
    for (const auto& i : p.interests) interests.push_back(i.token);
    c.expect(political_content(interests, keywords) == p.political_content, "portrait flag agrees with the check");
    return p.political_content;
  };
  c.expect(political_with(5), "keyword in the top 50 sets political_content");
  c.expect(!political_with(1), "keyword ranked 61st leaves political_content unset");
  c.expect(!political_with(0), "no keyword leaves political_content unset");
  c.detail = "n in {1, 2, 10, 100, 1000}, political check both ways";
}

// ---------------------------------------------------------------------------
// 6. Experiment plumbing.

void experiment(Check& c) {
  const int users = 10000;
  std::map<std::pair<UiCondition, Algorithm>, int> cells;
  for (int i = 0; i < users; ++i) {
    const auto cond = assign_condition("signup_" + std::to_string(i), 1);
    ++cells[{cond.ui, cond.rec}];
    c.expect(assign_condition("signup_" + std::to_string(i), 1) == cond, "assignment is stable");
  }
  std::ostringstream os;
  os.precision(3);
  os << "cells";
  c.expect(cells.size() == 4, "four cells populated");
  for (const auto& [cell, count] : cells) {
    const double share = static_cast<double>(count) / users;
    os << " " << share;
    c.expect(share >= 0.22 && share <= 0.28, "cell share within 25% +/- 3%");
  }

  // Replay: summaries from the live log equal summaries from a reopened one.
  fixtures::TempDir dir;
  const auto log_path = dir / "events.ndjson";
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> gap(1, 3600), kind(0, 6);
  std::vector<std::string> ids;
  std::map<std::string, EngagementSummary> live;
  {
    EventLog log(log_path);
    TimestampMs now = parse_timestamp_ms("2015-06-01T00:00:00Z");
    for (int u = 0; u < 40; ++u) {
      const std::string user = "reader_" + std::to_string(u);
      ids.push_back(user);
      TimestampMs t = now;
      std::vector<InteractionEvent> batch;
      for (int e = 0; e < 25; ++e) {
        t += std::chrono::seconds(gap(gen));
        batch.push_back({user, "s" + std::to_string(u), static_cast<EventKind>(kind(gen)), "user_b_00" + std::to_string(e % 10), t, {}});
      }
      log.append(batch, now += std::chrono::seconds(1));
    }
    const auto events = log.snapshot();
    for (const auto& id : ids) live[id] = engagement(id, events);
  }
  const EventLog replayed(log_path);
  const auto events = replayed.snapshot();
  c.expect(events.size() == 40u * 25u, "replayed every event");
  for (const auto& id : ids) c.expect(engagement(id, events) == live[id], "replayed summary for " + id);

  const auto t0 = parse_timestamp_ms("2015-06-01T10:00:00Z");
  const std::vector<InteractionEvent> dwell_events{
      {"d", "s", EventKind::page_view, std::nullopt, t0, {}},
      {"d", "s", EventKind::portrait_word_click, "w", t0 + std::chrono::seconds(10), {}},
      {"d", "s", EventKind::rec_explore_click, "x", t0 + std::chrono::seconds(20), {}}};
  const auto s = engagement("d", dwell_events);
  c.expect(s.dwell_seconds == 20.0, "dwell for t, t+10, t+20 is exactly 20 s");
  os << ", dwell " << s.dwell_seconds << " s";
  c.detail = os.str();
}

// ---------------------------------------------------------------------------
// 7. End to end through the command line and the HTTP server.

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DATAPORTRAITS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Starts `serve` with stdout on a pipe and returns (pid, port).
std::pair<pid_t, int> start_server(const std::vector<std::string>& args) {
  int fds[2];
  if (pipe(fds) != 0) return {-1, -1};
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> argv;
    std::string exe = DATAPORTRAITS_CLI;
    argv.push_back(exe.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(exe.c_str(), argv.data());
    _exit(127);
  }
  close(fds[1]);
  FILE* out = fdopen(fds[0], "r");
  char line[256];
  int port = -1;
  while (out != nullptr && std::fgets(line, sizeof line, out) != nullptr) {
    const std::string s(line);
    const auto at = s.find("listening on ");
    if (at == std::string::npos) continue;
    port = std::stoi(s.substr(s.rfind(':') + 1));
    break;
  }
  // Leave the pipe open for the server's later output; it is closed at exit.
  return {pid, port};
}

bool in_unit(const json& v) { return v.is_number() && v.get<double>() >= 0 && v.get<double>() <= 1; }

void validate_recommendations(Check& c, const json& j, const std::string& user, int k, const std::string& tag) {
  for (const char* key : {"target", "algorithm", "gamma", "top_n", "recommendations", "clusters", "profiles", "condition"})
    c.expect(j.contains(key), tag + ": has " + key);
  if (!c.failures.empty()) return;
  c.expect(j["target"] == user, tag + ": target");
  const auto& cond = j["condition"];
  for (const char* key : {"user_id", "ui", "rec", "assigned_at"}) c.expect(cond.contains(key), tag + ": condition." + key);
  c.expect(j["algorithm"] == cond["rec"], tag + ": algorithm matches the assigned condition");
  const auto& recs = j["recommendations"];
  c.expect(recs.is_array() && !recs.empty() && recs.size() <= j["top_n"].get<std::size_t>(), tag + ": list length");
  std::set<std::string> seen;
  double previous = 2;
  for (const auto& r : recs) {
    c.expect(r["candidate_id"].is_string() && r["candidate_id"] != user, tag + ": candidate id");
    c.expect(seen.insert(r["candidate_id"].get<std::string>()).second, tag + ": no duplicate candidates");
    c.expect(in_unit(r["score"]) && in_unit(r["distance_norm"]) && in_unit(r["jit"]), tag + ": scores in [0, 1]");
    c.expect(r["score"].get<double>() <= previous, tag + ": sorted by score");
    previous = r["score"].get<double>();
    const int dom = r["dominant_topic"].get<int>();
    c.expect(dom >= 0 && dom < k, tag + ": dominant topic in range");
    c.expect(r["shared_intermediary_topics"].is_array(), tag + ": shared topics list");
    c.expect(j["profiles"].contains(r["candidate_id"].get<std::string>()), tag + ": profile for each candidate");
  }
  std::size_t members = 0;
  for (const auto& cl : j["clusters"]) {
    for (const auto& m : cl["members"]) {
      c.expect(m["dominant_topic"] == cl["cluster_topic"], tag + ": cluster membership by dominant topic");
      ++members;
    }
  }
  c.expect(members == recs.size(), tag + ": clusters partition the list");
}

void end_to_end(Check& c) {
  fixtures::TempDir dir;
  const auto d = [&](const char* name) { return (dir / name).string(); };
  const auto start = std::chrono::steady_clock::now();
  c.expect(run_cli("simulate --out " + d("synth")) == 0, "simulate");
  c.expect(run_cli("ingest --input " + d("synth") + "/tweets.ndjson --profiles " + d("synth") +
                   "/profiles.ndjson --out " + d("corpus")) == 0,
           "ingest");
  c.expect(run_cli("train --corpus " + d("corpus") + " --k 20 --iters 200 --seed 1 --out " + d("model.bin")) == 0, "train");
  c.expect(run_cli("graph --model " + d("model.bin") + " --epsilon 0.01 --method weighted_closeness --out " +
                   d("graph.json")) == 0,
           "graph");
  if (!c.failures.empty()) return;

  // Targets covering both recommender conditions under seed 7.
  const std::uint64_t seed = 7;
  std::vector<std::string> targets;
  std::map<Algorithm, int> per_algorithm;
  for (const auto& l : synth::load_labels(dir / "synth" / "labels.json")) {
    const auto cond = assign_condition(l.user_id, seed);
    if (per_algorithm[cond.rec] >= 2) continue;
    ++per_algorithm[cond.rec];
    targets.push_back(l.user_id);
    if (targets.size() == 4) break;
  }
  c.expect(per_algorithm[Algorithm::IT] == 2 && per_algorithm[Algorithm::KLD] == 2, "targets cover both conditions");

  std::map<std::string, json> cli_recs;
  for (const auto& user : targets) {
    const auto algo = std::string(to_string(assign_condition(user, seed).rec));
    const auto out = dir / ("recs_" + user + ".json");
    c.expect(run_cli("recommend --corpus " + d("corpus") + " --model " + d("model.bin") + " --graph " + d("graph.json") +
                     " --target " + user + " --algorithm " + algo + " --gamma 1.0 --top-n 20 --out " + out.string()) == 0,
             "recommend " + user);
    cli_recs[user] = read_json(out);
  }
  if (!c.failures.empty()) return;

  const auto [pid, port] = start_server({"serve", "--corpus", d("corpus"), "--model", d("model.bin"), "--graph",
                                         d("graph.json"), "--port", "0", "--seed", std::to_string(seed), "--state",
                                         d("state")});
  c.expect(pid > 0 && port > 0, "serve reports a listening port");
  if (port > 0) {
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    for (const auto& user : targets) {
      const auto posted = client.Post("/users", json{{"user_id", user}}.dump(), "application/json");
      c.expect(posted && posted->status == 202, "POST /users " + user);
      if (!posted) continue;
      const auto signup = json::parse(posted->body);
      const auto expected = assign_condition(user, seed);
      c.expect(signup["condition"]["rec"] == std::string(to_string(expected.rec)) &&
                   signup["condition"]["ui"] == std::string(to_string(expected.ui)),
               "sign-up condition for " + user);

      const auto got = client.Get("/recommendations/" + user);
      c.expect(got && got->status == 200, "GET /recommendations " + user);
      if (!got) continue;
      const auto j = json::parse(got->body);
      validate_recommendations(c, j, user, 20, user);
      if (!c.failures.empty()) break;
      c.expect(j["condition"] == signup["condition"], user + ": condition unchanged after sign-up");
      std::vector<std::string> served, offline;
      for (const auto& r : j["recommendations"]) served.push_back(r["candidate_id"]);
      for (const auto& r : cli_recs[user]["recommendations"]) offline.push_back(r["candidate_id"]);
      c.expect(served == offline, user + ": served list equals offline recommend for the same algorithm");
    }
    const auto missing = client.Get("/recommendations/nobody_here");
    c.expect(missing && missing->status == 404, "unknown user is 404");
  }
  if (pid > 0) {
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os.precision(3);
  os << targets.size() << " users served over HTTP, " << secs << " s";
  c.detail = os.str();
}

}  // namespace

int main() {
  std::signal(SIGPIPE, SIG_IGN);
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"diversity_separation", diversity},
      {"formula_oracles", formulas},
      {"centrality_oracle", centrality_oracle},
      {"lda_sanity", lda},
      {"portrait_arithmetic", portrait},
      {"experiment_plumbing", experiment},
      {"end_to_end", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    for (std::size_t i = 0; i < c.failures.size() && i < 5; ++i) std::cout << "    " << c.failures[i] << "\n";
    if (c.failures.size() > 5) std::cout << "    ... " << c.failures.size() - 5 << " more\n";
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
