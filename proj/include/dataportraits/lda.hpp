#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dataportraits/corpus.hpp"

namespace dataportraits {

using TopicId = int;

struct ModelConfig {
  int k = 100;
  // Symmetric document-topic prior; unset means 50 / k.
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 500;
  int burn_in = 100;
  // Topical-significance threshold. Nothing requires epsilon < 1/k.
  double epsilon = 0.01;
  std::uint64_t rng_seed = 1;
  // Fold-in sweeps used by infer() for documents outside the training set.
  int inference_iterations = 50;

  double effective_alpha() const { return alpha.value_or(50.0 / k); }
  // Throws std::invalid_argument on any violated constraint.
  void validate() const;
};

struct TopicVector {
  std::string user_id;
  std::vector<double> probs;

  TopicId dominant_topic() const;
};

class TopicModel {
 public:
  TopicModel() = default;
  // topic_word is k x V row-major; doc_topic is D x k row-major.
  TopicModel(ModelConfig config, std::vector<std::string> vocabulary, std::vector<double> topic_word,
             std::vector<std::string> doc_ids = {}, std::vector<double> doc_topic = {});

  const ModelConfig& config() const { return config_; }
  int k() const { return config_.k; }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::optional<std::uint32_t> word_id(std::string_view surface) const;

  // P(w | t).
  double word_prob(TopicId t, std::uint32_t w) const {
    return topic_word_[static_cast<std::size_t>(t) * vocabulary_.size() + w];
  }
  std::span<const double> topic_row(TopicId t) const;
  std::vector<std::string> top_words(TopicId t, std::size_t n) const;

  // Training documents and their P(t | u) from the final sample.
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::optional<TopicVector> doc_vector(std::string_view user_id) const;
  std::vector<TopicVector> doc_vectors() const;

  const std::vector<double>& topic_word() const { return topic_word_; }
  const std::vector<double>& doc_topic() const { return doc_topic_; }

 private:
  ModelConfig config_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::uint32_t> word_ids_;
  std::vector<double> topic_word_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::vector<double> doc_topic_;
};

struct SweepStats {
  int iteration = 0;  // 1-based
  std::uint64_t total_assignments = 0;
  std::uint64_t total_tokens = 0;
  // Collapsed joint log p(w, z); NaN unless requested.
  double log_likelihood = 0;
};

struct TrainOptions {
  std::function<void(const SweepStats&)> on_sweep;
  bool compute_log_likelihood = false;
};

struct TrainResult {
  TopicModel model;
  std::vector<std::string> warnings;
};

// Bag of (word id, count) pairs over a shared vocabulary.
struct TrainingDocument {
  std::string id;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
};

// Collapsed Gibbs sampling, one document per user. Throws
// std::invalid_argument on an empty corpus or a document without tokens.
TrainResult train(const Corpus& corpus, const ModelConfig& config, const TrainOptions& options = {});
TrainResult train(std::span<const TrainingDocument> docs, std::vector<std::string> vocabulary,
                  const ModelConfig& config, const TrainOptions& options = {});

// (n_t + alpha) / (N + k * alpha).
std::vector<double> smoothed_distribution(std::span<const std::uint32_t> topic_counts, double alpha);

struct InferResult {
  TopicVector vector;
  std::size_t in_vocabulary_tokens = 0;
  // True when no token was in the model vocabulary; the vector is uniform.
  bool uniform_fallback = false;
};

// Fold-in Gibbs sampling against the fixed topic-word matrix. Out-of-vocabulary
// surfaces are dropped. Seeded from the model seed and the user id.
InferResult infer(const TopicModel& model, std::string_view user_id,
                  std::span<const std::pair<std::string, std::uint32_t>> surface_counts);
InferResult infer(const TopicModel& model, const UserDocument& doc, const Vocabulary& vocab);

// Topic vector for a user: the training posterior when the user was part of
// training, otherwise fold-in inference.
TopicVector topic_vector_for(const TopicModel& model, const UserDocument& doc, const Vocabulary& vocab);

// {i : probs[i] >= epsilon}, ascending.
std::vector<TopicId> significant_topics(const TopicVector& v, double epsilon);

// Versioned little-endian binary bundle {config, vocabulary, topic_word,
// doc ids, doc_topic}. Reload is bit-exact.
void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);
std::string serialize_model(const TopicModel& model);
TopicModel deserialize_model(std::string_view bytes);

}  // namespace dataportraits
