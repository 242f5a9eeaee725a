#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dataportraits/corpus.hpp"
#include "dataportraits/lda.hpp"
#include "dataportraits/topic_graph.hpp"

namespace dataportraits {

enum class Algorithm { KLD, IT };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct RecConfig {
  double gamma = 1.0;
  std::size_t top_n = 20;
  int candidate_window_hours = 48;
  Algorithm algorithm = Algorithm::IT;

  void validate() const;
};

struct Recommendation {
  std::string candidate_id;
  double score = 0;
  double distance_norm = 0;
  double jit = 0;
  TopicId dominant_topic = 0;
  std::vector<TopicId> shared_intermediary_topics;
};

struct RecommendationCluster {
  TopicId cluster_topic = 0;
  std::vector<Recommendation> members;
  std::vector<std::string> label;
};

// sum_i (a_i - b_i) * ln(a_i / b_i). Requires equal length and strictly
// positive entries; throws std::invalid_argument otherwise.
double kld_symmetric(std::span<const double> a, std::span<const double> b);
inline double kld_symmetric(const TopicVector& a, const TopicVector& b) {
  return kld_symmetric(a.probs, b.probs);
}

// Divides by the maximum; an all-zero input maps to zeros.
std::vector<double> normalize_distances(std::span<const double> distances);

// |A ∩ B| / |A ∪ B| over sorted, duplicate-free sets; two empty sets give 0.
double jaccard(std::span<const TopicId> a, std::span<const TopicId> b);

// (1 + g^2) * S * (1 - D) / (g^2 * (1 - D) + S); 0 when the denominator is 0.
// Throws std::invalid_argument for S or D outside [0, 1] or gamma <= 0.
double fscore(double similarity, double distance, double gamma);

// Significant topics of `v` that are also intermediary topics.
std::vector<TopicId> intermediary_profile(const TopicVector& v, const IntermediaryTopicSet& itset,
                                          double epsilon);

// Scores every candidate against `target` and keeps the best cfg.top_n.
// IT: fscore(jit, normalized kld, gamma). KLD: 1 - normalized kld. Distances
// are normalized over this candidate set. Ties go to the smaller candidate id.
std::vector<Recommendation> score_candidates(const TopicVector& target, std::span<const TopicVector> candidates,
                                             const RecConfig& cfg, const IntermediaryTopicSet& itset,
                                             double epsilon);

// Resolves topic vectors through the model and delegates to score_candidates.
class Recommender {
 public:
  Recommender(const Corpus& corpus, const TopicModel& model, IntermediaryTopicSet itset);

  // Users (other than target) active within the window before the corpus
  // reference time and not already followed by the target.
  std::vector<std::string> eligible_candidates(std::string_view target, const RecConfig& cfg) const;

  std::vector<Recommendation> recommend(std::string_view target, std::span<const std::string> candidates,
                                        const RecConfig& cfg) const;
  std::vector<Recommendation> recommend(std::string_view target, const RecConfig& cfg) const;

  const TopicVector& vector(std::string_view user_id) const;
  const TopicModel& model() const { return model_; }
  const IntermediaryTopicSet& intermediary() const { return itset_; }

 private:
  const Corpus& corpus_;
  const TopicModel& model_;
  IntermediaryTopicSet itset_;
  std::vector<TopicVector> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Groups by dominant topic; clusters by size descending then topic id,
// members keep their ranked order, labels are the topic's top-5 words.
std::vector<RecommendationCluster> cluster(std::span<const Recommendation> recs, const TopicModel& model);

nlohmann::json recommendations_to_json(std::string_view target, Algorithm algorithm, const RecConfig& cfg,
                                       std::span<const Recommendation> recs,
                                       std::span<const RecommendationCluster> clusters);

}  // namespace dataportraits
