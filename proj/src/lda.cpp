#include "dataportraits/lda.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dataportraits/rng.hpp"

namespace dataportraits {
namespace {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

constexpr char kModelMagic[8] = {'D', 'P', 'L', 'D', 'A', 'M', 'D', 'L'};
constexpr std::uint32_t kModelVersion = 1;

class GibbsSampler {
 public:
  GibbsSampler(std::span<const TrainingDocument> docs, std::size_t vocab_size, const ModelConfig& cfg)
      : k_(static_cast<std::size_t>(cfg.k)),
        v_(vocab_size),
        alpha_(cfg.effective_alpha()),
        beta_(cfg.beta),
        rng_(cfg.rng_seed),
        doc_count_(docs.size()),
        n_dt_(docs.size() * k_, 0),
        n_wt_(vocab_size * k_, 0),
        n_t_(k_, 0),
        p_(k_) {
    offsets_.reserve(docs.size() + 1);
    offsets_.push_back(0);
    for (const auto& doc : docs) {
      for (const auto& [w, count] : doc.counts) {
        if (w >= v_) throw std::invalid_argument("word id out of vocabulary range");
        words_.insert(words_.end(), count, w);
      }
      offsets_.push_back(words_.size());
    }
    z_.resize(words_.size());
    for (std::size_t d = 0; d < doc_count_; ++d) {
      for (std::size_t i = offsets_[d]; i < offsets_[d + 1]; ++i) {
        const auto t = static_cast<std::uint32_t>(rng_.below(k_));
        z_[i] = t;
        add(d, words_[i], t);
      }
    }
  }

  void sweep() {
    const double v_beta = static_cast<double>(v_) * beta_;
    for (std::size_t d = 0; d < doc_count_; ++d) {
      std::uint32_t* doc_counts = &n_dt_[d * k_];
      for (std::size_t i = offsets_[d]; i < offsets_[d + 1]; ++i) {
        const std::uint32_t w = words_[i];
        const std::uint32_t old = z_[i];
        remove(d, w, old);
        const std::uint32_t* word_counts = &n_wt_[static_cast<std::size_t>(w) * k_];
        double total = 0;
        for (std::size_t t = 0; t < k_; ++t) {
          total += (doc_counts[t] + alpha_) * (word_counts[t] + beta_) / (n_t_[t] + v_beta);
          p_[t] = total;
        }
        const double u = rng_.uniform() * total;
        std::size_t t = 0;
        while (t + 1 < k_ && p_[t] <= u) ++t;
        z_[i] = static_cast<std::uint32_t>(t);
        add(d, w, static_cast<std::uint32_t>(t));
      }
    }
  }

  SweepStats stats(int iteration, bool with_likelihood) const {
    SweepStats s;
    s.iteration = iteration;
    s.total_tokens = words_.size();
    std::uint64_t by_topic = 0, by_doc = 0, by_word = 0;
    for (auto c : n_t_) by_topic += c;
    for (auto c : n_dt_) by_doc += c;
    for (auto c : n_wt_) by_word += c;
    if (by_topic != by_doc || by_topic != by_word)
      throw std::logic_error("Gibbs count tables disagree");
    s.total_assignments = by_topic;
    s.log_likelihood = with_likelihood ? log_likelihood() : std::numeric_limits<double>::quiet_NaN();
    return s;
  }

  // Collapsed log p(w, z) under symmetric priors.
  double log_likelihood() const {
    const double kd = static_cast<double>(k_);
    const double vd = static_cast<double>(v_);
    double ll = 0;
    const double lg_beta = std::lgamma(beta_);
    for (std::size_t t = 0; t < k_; ++t) {
      ll += std::lgamma(vd * beta_) - std::lgamma(n_t_[t] + vd * beta_);
    }
    for (std::size_t w = 0; w < v_; ++w) {
      for (std::size_t t = 0; t < k_; ++t) {
        const auto c = n_wt_[w * k_ + t];
        if (c != 0) ll += std::lgamma(c + beta_) - lg_beta;
      }
    }
    const double lg_alpha = std::lgamma(alpha_);
    for (std::size_t d = 0; d < doc_count_; ++d) {
      const double len = static_cast<double>(offsets_[d + 1] - offsets_[d]);
      ll += std::lgamma(kd * alpha_) - std::lgamma(len + kd * alpha_);
      for (std::size_t t = 0; t < k_; ++t) {
        const auto c = n_dt_[d * k_ + t];
        if (c != 0) ll += std::lgamma(c + alpha_) - lg_alpha;
      }
    }
    return ll;
  }

  std::vector<double> topic_word() const {
    std::vector<double> phi(k_ * v_);
    const double v_beta = static_cast<double>(v_) * beta_;
    for (std::size_t t = 0; t < k_; ++t) {
      const double denom = n_t_[t] + v_beta;
      for (std::size_t w = 0; w < v_; ++w) phi[t * v_ + w] = (n_wt_[w * k_ + t] + beta_) / denom;
    }
    return phi;
  }

  std::vector<double> doc_topic() const {
    std::vector<double> theta;
    theta.reserve(doc_count_ * k_);
    for (std::size_t d = 0; d < doc_count_; ++d) {
      const auto row = smoothed_distribution(std::span(&n_dt_[d * k_], k_), alpha_);
      theta.insert(theta.end(), row.begin(), row.end());
    }
    return theta;
  }

 private:
  void add(std::size_t d, std::uint32_t w, std::uint32_t t) {
    ++n_dt_[d * k_ + t];
    ++n_wt_[static_cast<std::size_t>(w) * k_ + t];
    ++n_t_[t];
  }
  void remove(std::size_t d, std::uint32_t w, std::uint32_t t) {
    --n_dt_[d * k_ + t];
    --n_wt_[static_cast<std::size_t>(w) * k_ + t];
    --n_t_[t];
  }

  std::size_t k_;
  std::size_t v_;
  double alpha_;
  double beta_;
  Rng rng_;
  std::size_t doc_count_;
  std::vector<std::uint32_t> words_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> z_;
  std::vector<std::uint32_t> n_dt_;
  std::vector<std::uint32_t> n_wt_;
  std::vector<std::uint32_t> n_t_;
  std::vector<double> p_;
};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void put_doubles(const std::vector<double>& v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void raw(const char* data, std::size_t n) { out_.append(data, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> get_doubles(std::size_t n) {
    if (n > (in_.size() - pos_) / sizeof(double)) throw std::runtime_error("truncated model file");
    std::vector<double> v(n);
    std::memcpy(v.data(), in_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw std::runtime_error("truncated model file");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

void ModelConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  if (!(effective_alpha() > 0) || !std::isfinite(effective_alpha()))
    throw std::invalid_argument("alpha must be > 0");
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("burn_in must be in [0, iterations)");
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (inference_iterations < 1) throw std::invalid_argument("inference_iterations must be positive");
}

TopicId TopicVector::dominant_topic() const {
  if (probs.empty()) throw std::logic_error("empty topic vector");
  return static_cast<TopicId>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

TopicModel::TopicModel(ModelConfig config, std::vector<std::string> vocabulary, std::vector<double> topic_word,
                       std::vector<std::string> doc_ids, std::vector<double> doc_topic)
    : config_(std::move(config)),
      vocabulary_(std::move(vocabulary)),
      topic_word_(std::move(topic_word)),
      doc_ids_(std::move(doc_ids)),
      doc_topic_(std::move(doc_topic)) {
  const auto k = static_cast<std::size_t>(config_.k);
  if (topic_word_.size() != k * vocabulary_.size())
    throw std::invalid_argument("topic_word must be k x V");
  if (doc_topic_.size() != doc_ids_.size() * k) throw std::invalid_argument("doc_topic must be D x k");
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!word_ids_.emplace(vocabulary_[i], static_cast<std::uint32_t>(i)).second)
      throw std::invalid_argument("duplicate vocabulary entry " + vocabulary_[i]);
  }
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    if (!doc_index_.emplace(doc_ids_[d], d).second)
      throw std::invalid_argument("duplicate document id " + doc_ids_[d]);
  }
}

std::optional<std::uint32_t> TopicModel::word_id(std::string_view surface) const {
  const auto it = word_ids_.find(std::string(surface));
  if (it == word_ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> TopicModel::topic_row(TopicId t) const {
  return std::span<const double>(topic_word_).subspan(static_cast<std::size_t>(t) * vocabulary_.size(),
                                                      vocabulary_.size());
}

std::vector<std::string> TopicModel::top_words(TopicId t, std::size_t n) const {
  const auto row = topic_row(t);
  std::vector<std::uint32_t> ids(row.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return vocabulary_[a] < vocabulary_[b];
                    });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocabulary_[ids[i]]);
  return out;
}

std::optional<TopicVector> TopicModel::doc_vector(std::string_view user_id) const {
  const auto it = doc_index_.find(std::string(user_id));
  if (it == doc_index_.end()) return std::nullopt;
  const auto k = static_cast<std::size_t>(config_.k);
  const auto begin = doc_topic_.begin() + static_cast<std::ptrdiff_t>(it->second * k);
  return TopicVector{std::string(user_id), std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(k))};
}

std::vector<TopicVector> TopicModel::doc_vectors() const {
  std::vector<TopicVector> out;
  out.reserve(doc_ids_.size());
  for (const auto& id : doc_ids_) out.push_back(*doc_vector(id));
  return out;
}

std::vector<double> smoothed_distribution(std::span<const std::uint32_t> topic_counts, double alpha) {
  double total = 0;
  for (auto c : topic_counts) total += c;
  const double denom = total + static_cast<double>(topic_counts.size()) * alpha;
  std::vector<double> out(topic_counts.size());
  for (std::size_t t = 0; t < topic_counts.size(); ++t) out[t] = (topic_counts[t] + alpha) / denom;
  return out;
}

TrainResult train(std::span<const TrainingDocument> docs, std::vector<std::string> vocabulary,
                  const ModelConfig& config, const TrainOptions& options) {
  config.validate();
  if (docs.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  for (const auto& doc : docs) {
    std::uint64_t n = 0;
    for (const auto& [w, c] : doc.counts) n += c;
    if (n == 0) throw std::invalid_argument("document " + doc.id + " has no tokens");
  }
  TrainResult result;
  if (static_cast<std::size_t>(config.k) > vocabulary.size()) {
    result.warnings.push_back("k=" + std::to_string(config.k) + " exceeds the " +
                              std::to_string(vocabulary.size()) + " distinct tokens");
  }

  GibbsSampler sampler(docs, vocabulary.size(), config);
  for (int it = 1; it <= config.iterations; ++it) {
    sampler.sweep();
    if (options.on_sweep) options.on_sweep(sampler.stats(it, options.compute_log_likelihood));
  }

  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& doc : docs) ids.push_back(doc.id);
  result.model = TopicModel(config, std::move(vocabulary), sampler.topic_word(), std::move(ids),
                            sampler.doc_topic());
  return result;
}

TrainResult train(const Corpus& corpus, const ModelConfig& config, const TrainOptions& options) {
  std::vector<TrainingDocument> docs;
  docs.reserve(corpus.user_count());
  std::vector<std::string> skipped;
  for (const auto& doc : corpus.documents()) {
    // Users whose tweets tokenize to nothing fall back to inference later.
    if (doc.tokens.empty()) {
      skipped.push_back(doc.user_id);
      continue;
    }
    TrainingDocument td{doc.user_id, {}};
    td.counts.assign(doc.tokens.begin(), doc.tokens.end());
    docs.push_back(std::move(td));
  }
  auto result = train(docs, corpus.vocabulary().surfaces(), config, options);
  for (const auto& id : skipped) result.warnings.push_back("user " + id + " has no tokens; left out of training");
  return result;
}

InferResult infer(const TopicModel& model, std::string_view user_id,
                  std::span<const std::pair<std::string, std::uint32_t>> surface_counts) {
  const auto k = static_cast<std::size_t>(model.k());
  const double alpha = model.config().effective_alpha();
  InferResult result;
  result.vector.user_id = std::string(user_id);

  std::vector<std::uint32_t> words;
  for (const auto& [surface, count] : surface_counts) {
    if (const auto id = model.word_id(surface)) words.insert(words.end(), count, *id);
  }
  result.in_vocabulary_tokens = words.size();
  if (words.empty()) {
    result.vector.probs.assign(k, 1.0 / static_cast<double>(k));
    result.uniform_fallback = true;
    return result;
  }

  Rng rng(splitmix64(model.config().rng_seed ^ stable_hash(user_id)));
  std::vector<std::uint32_t> z(words.size());
  std::vector<std::uint32_t> counts(k, 0);
  for (auto& t : z) {
    t = static_cast<std::uint32_t>(rng.below(k));
    ++counts[t];
  }
  std::vector<double> p(k);
  for (int sweep = 0; sweep < model.config().inference_iterations; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --counts[z[i]];
      double total = 0;
      for (std::size_t t = 0; t < k; ++t) {
        total += (counts[t] + alpha) * model.word_prob(static_cast<TopicId>(t), words[i]);
        p[t] = total;
      }
      std::size_t t = 0;
      if (total > 0) {
        const double u = rng.uniform() * total;
        while (t + 1 < k && p[t] <= u) ++t;
      } else {
        t = rng.below(k);
      }
      z[i] = static_cast<std::uint32_t>(t);
      ++counts[t];
    }
  }
  result.vector.probs = smoothed_distribution(counts, alpha);
  return result;
}

InferResult infer(const TopicModel& model, const UserDocument& doc, const Vocabulary& vocab) {
  std::vector<std::pair<std::string, std::uint32_t>> bag;
  bag.reserve(doc.tokens.size());
  for (const auto& [id, count] : doc.tokens) bag.emplace_back(vocab.surface(id), count);
  return infer(model, doc.user_id, bag);
}

TopicVector topic_vector_for(const TopicModel& model, const UserDocument& doc, const Vocabulary& vocab) {
  if (auto v = model.doc_vector(doc.user_id)) return std::move(*v);
  return infer(model, doc, vocab).vector;
}

std::vector<TopicId> significant_topics(const TopicVector& v, double epsilon) {
  std::vector<TopicId> out;
  for (std::size_t i = 0; i < v.probs.size(); ++i) {
    if (v.probs[i] >= epsilon) out.push_back(static_cast<TopicId>(i));
  }
  return out;
}

std::string serialize_model(const TopicModel& model) {
  const ModelConfig& c = model.config();
  Writer w;
  w.raw(kModelMagic, sizeof kModelMagic);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::int32_t>(c.k);
  w.put<std::uint8_t>(c.alpha.has_value() ? 1 : 0);
  w.put<double>(c.alpha.value_or(0.0));
  w.put<double>(c.beta);
  w.put<std::int32_t>(c.iterations);
  w.put<std::int32_t>(c.burn_in);
  w.put<double>(c.epsilon);
  w.put<std::uint64_t>(c.rng_seed);
  w.put<std::int32_t>(c.inference_iterations);
  w.put<std::uint64_t>(model.vocabulary_size());
  for (const auto& s : model.vocabulary()) w.put_string(s);
  w.put_doubles(model.topic_word());
  w.put<std::uint64_t>(model.doc_ids().size());
  for (const auto& s : model.doc_ids()) w.put_string(s);
  w.put_doubles(model.doc_topic());
  return w.take();
}

TopicModel deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kModelMagic) != std::string_view(kModelMagic, sizeof kModelMagic))
    throw std::runtime_error("not a topic model file");
  if (const auto version = r.get<std::uint32_t>(); version != kModelVersion)
    throw std::runtime_error("unsupported topic model version " + std::to_string(version));
  ModelConfig c;
  c.k = r.get<std::int32_t>();
  const bool has_alpha = r.get<std::uint8_t>() != 0;
  const double alpha = r.get<double>();
  if (has_alpha) c.alpha = alpha;
  c.beta = r.get<double>();
  c.iterations = r.get<std::int32_t>();
  c.burn_in = r.get<std::int32_t>();
  c.epsilon = r.get<double>();
  c.rng_seed = r.get<std::uint64_t>();
  c.inference_iterations = r.get<std::int32_t>();
  c.validate();
  const auto v = r.get<std::uint64_t>();
  std::vector<std::string> vocab;
  vocab.reserve(v);
  for (std::uint64_t i = 0; i < v; ++i) vocab.push_back(r.get_string());
  auto topic_word = r.get_doubles(static_cast<std::size_t>(c.k) * v);
  const auto d = r.get<std::uint64_t>();
  std::vector<std::string> ids;
  ids.reserve(d);
  for (std::uint64_t i = 0; i < d; ++i) ids.push_back(r.get_string());
  auto doc_topic = r.get_doubles(static_cast<std::size_t>(c.k) * d);
  if (!r.done()) throw std::runtime_error("trailing bytes in model file");
  return TopicModel(c, std::move(vocab), std::move(topic_word), std::move(ids), std::move(doc_topic));
}

void save_model(const TopicModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TopicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace dataportraits
