#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataportraits/corpus.hpp"
#include "dataportraits/lda.hpp"
#include "dataportraits/recommender.hpp"
#include "dataportraits/topic_graph.hpp"

namespace dataportraits::synth {

// Two communities with disjoint political vocabularies, split into issues,
// plus shared themes that members of both communities talk about.
struct SynthSpec {
  int users_per_community = 100;
  int political_vocab_a = 150;
  int political_vocab_b = 150;
  int issues_per_community = 5;
  int issues_per_user = 1;
  int shared_themes = 10;
  int theme_vocab = 30;
  int themes_per_user = 3;
  int tweets_per_user = 50;
  int words_per_tweet = 8;
  double community_weight = 0.6;
  double shared_weight = 0.4;
  double stopword_probability = 0.5;
  double hashtag_probability = 0.3;
  double mention_probability = 0.1;
  double url_probability = 0.1;
  double retweet_probability = 0.15;
  int span_days = 14;
  std::string end_time = "2015-06-01T00:00:00Z";
  std::uint64_t rng_seed = 1;

  // Throws std::invalid_argument for degenerate or inconsistent specs.
  void validate() const;
};

nlohmann::json spec_to_json(const SynthSpec& spec);
// Missing fields keep their defaults.
SynthSpec spec_from_json(const nlohmann::json& j);

enum class Community { A, B };

struct UserLabel {
  std::string user_id;
  Community community = Community::A;
  std::vector<int> issues;
  std::vector<int> themes;
};

struct SynthCorpus {
  std::vector<TweetRecord> tweets;
  std::vector<UserProfile> profiles;
  std::vector<UserLabel> labels;
};

SynthCorpus generate(const SynthSpec& spec);

// Writes tweets.ndjson, profiles.ndjson, labels.json and spec.json.
void write_synth(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& dir);
std::vector<UserLabel> load_labels(const std::filesystem::path& path);

// Theme vocabulary and community political vocabulary surfaces, as emitted.
std::vector<std::string> theme_words(const SynthSpec& spec, int theme);
std::vector<std::string> issue_words(const SynthSpec& spec, Community c, int issue);

// Mean over users with at least one recommendation of the share of their
// recommendations that come from the other community.
double cross_community_fraction(const std::map<std::string, std::vector<std::string>>& recs,
                                const std::vector<UserLabel>& labels);

struct AlgorithmOutcome {
  double cross_fraction = 0;
  std::map<std::string, std::vector<std::string>> recommendations;
};

struct DiversityTrial {
  std::uint64_t seed = 0;
  AlgorithmOutcome it;
  AlgorithmOutcome kld;
  std::vector<TopicId> intermediary_topics;
  double seconds = 0;
};

struct EvaluationConfig {
  ModelConfig model;
  RecConfig rec;
  CentralityMethod method = CentralityMethod::weighted_closeness;
};

EvaluationConfig default_evaluation_config();

// Recommends for every labeled user under both algorithms and measures the
// cross-community share.
DiversityTrial evaluate_corpus(const Corpus& corpus, const std::vector<UserLabel>& labels,
                               const EvaluationConfig& cfg);

// generate -> corpus -> train -> graph -> recommend, with the given seed
// driving both the generator and the sampler.
DiversityTrial run_trial(SynthSpec spec, EvaluationConfig cfg, std::uint64_t seed);

nlohmann::json trial_to_json(const DiversityTrial& t);

}  // namespace dataportraits::synth
