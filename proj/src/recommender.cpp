#include "dataportraits/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace dataportraits {

using nlohmann::json;

std::string_view to_string(Algorithm a) { return a == Algorithm::IT ? "IT" : "KLD"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "IT" || name == "it") return Algorithm::IT;
  if (name == "KLD" || name == "kld") return Algorithm::KLD;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

void RecConfig::validate() const {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and > 0");
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  if (candidate_window_hours < 1) throw std::invalid_argument("candidate window must be >= 1 hour");
}

double kld_symmetric(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("topic vectors differ in length");
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0) || !(b[i] > 0)) throw std::invalid_argument("topic vectors must be strictly positive");
    sum += (a[i] - b[i]) * std::log(a[i] / b[i]);
  }
  return sum;
}

std::vector<double> normalize_distances(std::span<const double> distances) {
  double max = 0;
  for (double d : distances) {
    if (!(d >= 0)) throw std::invalid_argument("distances must be nonnegative");
    max = std::max(max, d);
  }
  std::vector<double> out(distances.size(), 0.0);
  if (max == 0) return out;
  for (std::size_t i = 0; i < distances.size(); ++i) out[i] = distances[i] / max;
  return out;
}

double jaccard(std::span<const TopicId> a, std::span<const TopicId> b) {
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t unite = a.size() + b.size() - common;
  return unite == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unite);
}

double fscore(double similarity, double distance, double gamma) {
  if (!(similarity >= 0 && similarity <= 1)) throw std::invalid_argument("similarity outside [0, 1]");
  if (!(distance >= 0 && distance <= 1)) throw std::invalid_argument("distance outside [0, 1]");
  if (!(gamma > 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and > 0");
  const double g2 = gamma * gamma;
  const double closeness = 1.0 - distance;
  const double denom = g2 * closeness + similarity;
  if (denom == 0) return 0.0;
  return (1.0 + g2) * similarity * closeness / denom;
}

std::vector<TopicId> intermediary_profile(const TopicVector& v, const IntermediaryTopicSet& itset, double epsilon) {
  std::vector<TopicId> out;
  for (TopicId t : significant_topics(v, epsilon)) {
    if (itset.contains(t)) out.push_back(t);
  }
  return out;
}

std::vector<Recommendation> score_candidates(const TopicVector& target, std::span<const TopicVector> candidates,
                                             const RecConfig& cfg, const IntermediaryTopicSet& itset,
                                             double epsilon) {
  cfg.validate();
  std::vector<Recommendation> recs;
  if (candidates.empty()) return recs;

  std::vector<double> raw;
  raw.reserve(candidates.size());
  for (const auto& c : candidates) raw.push_back(kld_symmetric(target, c));
  const auto dist = normalize_distances(raw);
  const auto target_it = intermediary_profile(target, itset, epsilon);

  recs.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Recommendation r;
    r.candidate_id = candidates[i].user_id;
    r.distance_norm = dist[i];
    const auto cand_it = intermediary_profile(candidates[i], itset, epsilon);
    r.jit = jaccard(target_it, cand_it);
    std::set_intersection(target_it.begin(), target_it.end(), cand_it.begin(), cand_it.end(),
                          std::back_inserter(r.shared_intermediary_topics));
    r.dominant_topic = candidates[i].dominant_topic();
    r.score = cfg.algorithm == Algorithm::IT ? fscore(r.jit, r.distance_norm, cfg.gamma) : 1.0 - r.distance_norm;
    recs.push_back(std::move(r));
  }
  const auto by_rank = [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.candidate_id < b.candidate_id;
  };
  const std::size_t keep = std::min(cfg.top_n, recs.size());
  std::partial_sort(recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(keep), recs.end(), by_rank);
  recs.resize(keep);
  return recs;
}

Recommender::Recommender(const Corpus& corpus, const TopicModel& model, IntermediaryTopicSet itset)
    : corpus_(corpus), model_(model), itset_(std::move(itset)) {
  if (!itset_.centrality.empty() && itset_.centrality.size() != static_cast<std::size_t>(model_.k()))
    throw std::invalid_argument("graph and model disagree on the number of topics");
  vectors_.reserve(corpus_.user_count());
  for (const auto& doc : corpus_.documents()) {
    index_.emplace(doc.user_id, vectors_.size());
    vectors_.push_back(topic_vector_for(model_, doc, corpus_.vocabulary()));
  }
}

const TopicVector& Recommender::vector(std::string_view user_id) const {
  const auto it = index_.find(std::string(user_id));
  if (it == index_.end()) throw std::out_of_range("unknown user " + std::string(user_id));
  return vectors_[it->second];
}

std::vector<std::string> Recommender::eligible_candidates(std::string_view target, const RecConfig& cfg) const {
  const Timestamp cutoff = corpus_.reference_time() - std::chrono::hours(cfg.candidate_window_hours);
  std::vector<std::string> followed;
  if (const UserProfile* p = corpus_.profile(target)) followed = p->following;
  std::sort(followed.begin(), followed.end());
  std::vector<std::string> out;
  for (const auto& doc : corpus_.documents()) {
    if (doc.user_id == target) continue;
    if (corpus_.last_activity(doc.user_id) < cutoff) continue;
    if (std::binary_search(followed.begin(), followed.end(), doc.user_id)) continue;
    out.push_back(doc.user_id);
  }
  return out;
}

std::vector<Recommendation> Recommender::recommend(std::string_view target, std::span<const std::string> candidates,
                                                   const RecConfig& cfg) const {
  const TopicVector& t = vector(target);
  std::vector<TopicVector> cands;
  cands.reserve(candidates.size());
  for (const auto& id : candidates) {
    if (id == target) continue;
    cands.push_back(vector(id));
  }
  return score_candidates(t, cands, cfg, itset_, model_.config().epsilon);
}

std::vector<Recommendation> Recommender::recommend(std::string_view target, const RecConfig& cfg) const {
  const auto candidates = eligible_candidates(target, cfg);
  return recommend(target, candidates, cfg);
}

std::vector<RecommendationCluster> cluster(std::span<const Recommendation> recs, const TopicModel& model) {
  std::map<TopicId, std::vector<Recommendation>> groups;
  for (const auto& r : recs) groups[r.dominant_topic].push_back(r);
  std::vector<RecommendationCluster> out;
  out.reserve(groups.size());
  for (auto& [topic, members] : groups) {
    RecommendationCluster c;
    c.cluster_topic = topic;
    c.members = std::move(members);
    if (topic >= 0 && topic < model.k()) c.label = model.top_words(topic, 5);
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const RecommendationCluster& a, const RecommendationCluster& b) {
    return a.members.size() > b.members.size();
  });
  return out;
}

namespace {
json rec_json(const Recommendation& r) {
  return {{"candidate_id", r.candidate_id},
          {"score", r.score},
          {"distance_norm", r.distance_norm},
          {"jit", r.jit},
          {"dominant_topic", r.dominant_topic},
          {"shared_intermediary_topics", r.shared_intermediary_topics}};
}
}  // namespace

json recommendations_to_json(std::string_view target, Algorithm algorithm, const RecConfig& cfg,
                                    std::span<const Recommendation> recs,
                                    std::span<const RecommendationCluster> clusters) {
  json j;
  j["target"] = std::string(target);
  j["algorithm"] = std::string(to_string(algorithm));
  j["gamma"] = cfg.gamma;
  j["top_n"] = cfg.top_n;
  json list = json::array();
  for (const auto& r : recs) list.push_back(rec_json(r));
  j["recommendations"] = std::move(list);
  json cl = json::array();
  for (const auto& c : clusters) {
    json members = json::array();
    for (const auto& m : c.members) members.push_back(rec_json(m));
    cl.push_back({{"cluster_topic", c.cluster_topic}, {"label", c.label}, {"members", std::move(members)}});
  }
  j["clusters"] = std::move(cl);
  return j;
}

}  // namespace dataportraits
