#include "dataportraits/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dataportraits/rng.hpp"

namespace dataportraits::synth {
namespace {

using nlohmann::json;

constexpr std::string_view kConsonants = "bcdfglmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr const char* kFillers[] = {"de", "la", "que", "el", "en", "y", "los", "para", "con", "por", "the", "and"};

std::string pseudo_word(std::string_view prefix, int index) {
  std::string w(prefix);
  const int base = static_cast<int>(kConsonants.size() * kVowels.size());
  int n = index;
  for (int s = 0; s < 2; ++s) {
    const int syl = n % base;
    n /= base;
    w.push_back(kConsonants[static_cast<std::size_t>(syl) / kVowels.size()]);
    w.push_back(kVowels[static_cast<std::size_t>(syl) % kVowels.size()]);
  }
  while (n > 0) {
    w.push_back(kConsonants[static_cast<std::size_t>(n % static_cast<int>(kConsonants.size()))]);
    n /= static_cast<int>(kConsonants.size());
  }
  return w;
}

std::string issue_prefix(Community c, int issue) {
  std::string p = c == Community::A ? "iz" : "de";
  p.push_back(static_cast<char>('a' + issue % 26));
  if (issue >= 26) p += std::to_string(issue / 26);
  return p;
}

std::string theme_prefix(int theme) {
  std::string p = "te";
  p.push_back(static_cast<char>('a' + theme % 26));
  if (theme >= 26) p += std::to_string(theme / 26);
  return p;
}

std::vector<int> split_sizes(int total, int parts) {
  std::vector<int> sizes(static_cast<std::size_t>(parts), total / parts);
  for (int i = 0; i < total % parts; ++i) ++sizes[static_cast<std::size_t>(i)];
  return sizes;
}

class Zipf {
 public:
  explicit Zipf(std::size_t n) : cumulative_(n) {
    double total = 0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / static_cast<double>(r + 1);
      cumulative_[r] = total;
    }
  }
  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    return static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::vector<int> choose(Rng& rng, int n, int k) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  std::vector<int> out(all.begin(), all.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t heavy_tail_count(Rng& rng) {
  return static_cast<std::uint64_t>(std::floor(std::exp(rng.uniform() * 5.0))) - 1;
}

std::string user_id(Community c, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user_%c_%03d", c == Community::A ? 'a' : 'b', i);
  return buf;
}

std::string to_string(Community c) { return c == Community::A ? "A" : "B"; }

}  // namespace

void SynthSpec::validate() const {
  if (users_per_community < 1) throw std::invalid_argument("users_per_community must be >= 1");
  if (tweets_per_user < 1) throw std::invalid_argument("tweets_per_user must be >= 1");
  if (words_per_tweet < 1) throw std::invalid_argument("words_per_tweet must be >= 1");
  if (issues_per_community < 1 || issues_per_user < 1 || issues_per_user > issues_per_community)
    throw std::invalid_argument("issues_per_user must lie in [1, issues_per_community]");
  if (political_vocab_a < issues_per_community || political_vocab_b < issues_per_community)
    throw std::invalid_argument("each issue needs at least one political word");
  if (shared_themes < 1 || theme_vocab < 1) throw std::invalid_argument("need at least one shared theme with words");
  if (themes_per_user < 1 || themes_per_user > shared_themes)
    throw std::invalid_argument("themes_per_user must lie in [1, shared_themes]");
  if (community_weight < 0 || shared_weight < 0 || std::abs(community_weight + shared_weight - 1.0) > 1e-12)
    throw std::invalid_argument("community_weight + shared_weight must equal 1");
  for (double p : {stopword_probability, hashtag_probability, mention_probability, url_probability,
                   retweet_probability}) {
    if (p < 0 || p > 1) throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (span_days < 2) throw std::invalid_argument("span_days must be >= 2");
  parse_timestamp(end_time);
}

json spec_to_json(const SynthSpec& s) {
  return {{"users_per_community", s.users_per_community},
          {"political_vocab_a", s.political_vocab_a},
          {"political_vocab_b", s.political_vocab_b},
          {"issues_per_community", s.issues_per_community},
          {"issues_per_user", s.issues_per_user},
          {"shared_themes", s.shared_themes},
          {"theme_vocab", s.theme_vocab},
          {"themes_per_user", s.themes_per_user},
          {"tweets_per_user", s.tweets_per_user},
          {"words_per_tweet", s.words_per_tweet},
          {"community_weight", s.community_weight},
          {"shared_weight", s.shared_weight},
          {"stopword_probability", s.stopword_probability},
          {"hashtag_probability", s.hashtag_probability},
          {"mention_probability", s.mention_probability},
          {"url_probability", s.url_probability},
          {"retweet_probability", s.retweet_probability},
          {"span_days", s.span_days},
          {"end_time", s.end_time},
          {"rng_seed", s.rng_seed}};
}

SynthSpec spec_from_json(const json& j) {
  SynthSpec s;
  s.users_per_community = j.value("users_per_community", s.users_per_community);
  s.political_vocab_a = j.value("political_vocab_a", s.political_vocab_a);
  s.political_vocab_b = j.value("political_vocab_b", s.political_vocab_b);
  s.issues_per_community = j.value("issues_per_community", s.issues_per_community);
  s.issues_per_user = j.value("issues_per_user", s.issues_per_user);
  s.shared_themes = j.value("shared_themes", s.shared_themes);
  s.theme_vocab = j.value("theme_vocab", s.theme_vocab);
  s.themes_per_user = j.value("themes_per_user", s.themes_per_user);
  s.tweets_per_user = j.value("tweets_per_user", s.tweets_per_user);
  s.words_per_tweet = j.value("words_per_tweet", s.words_per_tweet);
  s.shared_weight = j.value("shared_weight", s.shared_weight);
  // Either weight alone determines the other.
  s.community_weight = j.value("community_weight", 1.0 - s.shared_weight);
  if (!j.contains("shared_weight")) s.shared_weight = 1.0 - s.community_weight;
  s.stopword_probability = j.value("stopword_probability", s.stopword_probability);
  s.hashtag_probability = j.value("hashtag_probability", s.hashtag_probability);
  s.mention_probability = j.value("mention_probability", s.mention_probability);
  s.url_probability = j.value("url_probability", s.url_probability);
  s.retweet_probability = j.value("retweet_probability", s.retweet_probability);
  s.span_days = j.value("span_days", s.span_days);
  s.end_time = j.value("end_time", s.end_time);
  s.rng_seed = j.value("rng_seed", s.rng_seed);
  s.validate();
  return s;
}

std::vector<std::string> theme_words(const SynthSpec& spec, int theme) {
  std::vector<std::string> out;
  const std::string prefix = theme_prefix(theme);
  for (int i = 0; i < spec.theme_vocab; ++i) out.push_back(pseudo_word(prefix, i));
  return out;
}

std::vector<std::string> issue_words(const SynthSpec& spec, Community c, int issue) {
  const int total = c == Community::A ? spec.political_vocab_a : spec.political_vocab_b;
  const int size = split_sizes(total, spec.issues_per_community)[static_cast<std::size_t>(issue)];
  std::vector<std::string> out;
  const std::string prefix = issue_prefix(c, issue);
  for (int i = 0; i < size; ++i) out.push_back(pseudo_word(prefix, i));
  return out;
}

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);
  const Timestamp end = parse_timestamp(spec.end_time);
  const std::int64_t span = static_cast<std::int64_t>(spec.span_days) * 86400;

  std::vector<std::vector<std::string>> issues_a, issues_b, themes;
  for (int i = 0; i < spec.issues_per_community; ++i) {
    issues_a.push_back(issue_words(spec, Community::A, i));
    issues_b.push_back(issue_words(spec, Community::B, i));
  }
  for (int t = 0; t < spec.shared_themes; ++t) themes.push_back(theme_words(spec, t));

  SynthCorpus out;
  for (Community c : {Community::A, Community::B}) {
    for (int i = 0; i < spec.users_per_community; ++i) {
      UserLabel label;
      label.user_id = user_id(c, i);
      label.community = c;
      label.issues = choose(rng, spec.issues_per_community, spec.issues_per_user);
      label.themes = choose(rng, spec.shared_themes, spec.themes_per_user);
      out.labels.push_back(std::move(label));
    }
  }

  for (const auto& label : out.labels) {
    const auto& issues = label.community == Community::A ? issues_a : issues_b;
    const char community_letter = label.community == Community::A ? 'a' : 'b';

    UserProfile profile;
    profile.user_id = label.user_id;
    profile.display_name = "Usuario " + to_string(label.community) + " " + label.user_id.substr(7);
    profile.avatar_url = "https://avatars.example.org/" + label.user_id + ".png";
    profile.bio = "Cuenta sintética de la comunidad " + to_string(label.community);
    profile.follower_count = static_cast<double>(heavy_tail_count(rng) * 10 + rng.below(50));
    profile.following_count = static_cast<double>(heavy_tail_count(rng) * 5 + rng.below(200) + 1);
    profile.account_age_days = static_cast<double>(100 + rng.below(3000));
    out.profiles.push_back(std::move(profile));

    for (int n = 0; n < spec.tweets_per_user; ++n) {
      TweetRecord t;
      t.user_id = label.user_id;
      t.tweet_id = label.user_id + "_t" + std::to_string(n);
      // The first tweet lands in the final day so every user is a recent candidate.
      const std::int64_t window = n == 0 ? 86400 : span;
      t.created_at = end - std::chrono::seconds(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(window))));

      const bool shared = rng.bernoulli(spec.shared_weight);
      const std::vector<std::string>* source;
      std::string domain;
      if (shared) {
        const int theme = label.themes[rng.below(label.themes.size())];
        source = &themes[static_cast<std::size_t>(theme)];
        domain = theme_prefix(theme) + "news.com";
      } else {
        const int issue = label.issues[rng.below(label.issues.size())];
        source = &issues[static_cast<std::size_t>(issue)];
        domain = issue_prefix(label.community, issue) + "diario.cl";
      }
      const Zipf zipf(source->size());
      std::string text;
      for (int w = 0; w < spec.words_per_tweet; ++w) {
        if (w > 0) {
          text += ' ';
          if (rng.bernoulli(spec.stopword_probability)) {
            text += kFillers[rng.below(std::size(kFillers))];
            text += ' ';
          }
        }
        text += (*source)[zipf.sample(rng)];
      }
      if (rng.bernoulli(spec.hashtag_probability)) text += " #" + (*source)[zipf.sample(rng)];
      if (!shared && rng.bernoulli(spec.mention_probability)) {
        char handle[32];
        std::snprintf(handle, sizeof handle, " @user_%c_%03d", community_letter,
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.users_per_community))));
        text += handle;
      }
      if (rng.bernoulli(spec.url_probability)) text += " https://" + domain + "/" + (*source)[zipf.sample(rng)];
      t.text = std::move(text);
      t.is_retweet = rng.bernoulli(spec.retweet_probability);
      t.retweet_count = heavy_tail_count(rng);
      t.favorite_count = heavy_tail_count(rng);
      out.tweets.push_back(std::move(t));
    }
  }
  // Entities are derived from the text by the ingesting tokenizer.
  const Tokenizer tokenizer(StopwordList::builtin());
  for (auto& t : out.tweets) {
    auto e = tokenizer.entities(t.text);
    t.mentions = std::move(e.mentions);
    t.hashtags = std::move(e.hashtags);
    t.urls = std::move(e.urls);
  }
  return out;
}

void write_synth(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
  };
  std::string tweets;
  for (const auto& t : corpus.tweets) tweets += serialize_tweet(t) + "\n";
  write("tweets.ndjson", tweets);
  std::string profiles;
  for (const auto& p : corpus.profiles) profiles += serialize_profile(p) + "\n";
  write("profiles.ndjson", profiles);
  json users = json::array();
  for (const auto& l : corpus.labels)
    users.push_back({{"user_id", l.user_id}, {"community", to_string(l.community)}, {"issues", l.issues}, {"themes", l.themes}});
  write("labels.json", json{{"users", users}}.dump(2) + "\n");
  write("spec.json", spec_to_json(spec).dump(2) + "\n");
}

std::vector<UserLabel> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read labels " + path.string());
  const json j = json::parse(in);
  std::vector<UserLabel> out;
  for (const auto& u : j.at("users")) {
    UserLabel l;
    l.user_id = u.at("user_id").get<std::string>();
    const auto c = u.at("community").get<std::string>();
    if (c != "A" && c != "B") throw std::runtime_error("community must be A or B");
    l.community = c == "A" ? Community::A : Community::B;
    l.issues = u.value("issues", std::vector<int>{});
    l.themes = u.value("themes", std::vector<int>{});
    out.push_back(std::move(l));
  }
  return out;
}

double cross_community_fraction(const std::map<std::string, std::vector<std::string>>& recs,
                                const std::vector<UserLabel>& labels) {
  std::map<std::string, Community> community;
  for (const auto& l : labels) community.emplace(l.user_id, l.community);
  const auto lookup = [&](const std::string& id) {
    const auto it = community.find(id);
    if (it == community.end()) throw std::invalid_argument("no label for user " + id);
    return it->second;
  };
  double total = 0;
  std::size_t users = 0;
  for (const auto& [user, list] : recs) {
    if (list.empty()) continue;
    const Community own = lookup(user);
    std::size_t cross = 0;
    for (const auto& r : list) cross += lookup(r) != own ? 1 : 0;
    total += static_cast<double>(cross) / static_cast<double>(list.size());
    ++users;
  }
  return users == 0 ? 0.0 : total / static_cast<double>(users);
}

EvaluationConfig default_evaluation_config() {
  EvaluationConfig cfg;
  cfg.model.k = 20;
  cfg.rec.gamma = 1.0;
  cfg.rec.top_n = 10;
  return cfg;
}

DiversityTrial evaluate_corpus(const Corpus& corpus, const std::vector<UserLabel>& labels, const EvaluationConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  DiversityTrial trial;
  trial.seed = cfg.model.rng_seed;
  const TopicModel model = train(corpus, cfg.model).model;
  const auto vectors = model.doc_vectors();
  const TopicGraph graph = build_graph(vectors, cfg.model.epsilon);
  IntermediaryTopicSet itset = intermediary_topics(graph, cfg.method);
  trial.intermediary_topics = itset.topic_ids;
  const Recommender recommender(corpus, model, std::move(itset));

  for (const auto& label : labels) {
    if (corpus.document(label.user_id) == nullptr) continue;
    for (Algorithm a : {Algorithm::IT, Algorithm::KLD}) {
      RecConfig rc = cfg.rec;
      rc.algorithm = a;
      auto& outcome = a == Algorithm::IT ? trial.it : trial.kld;
      auto& ids = outcome.recommendations[label.user_id];
      for (const auto& r : recommender.recommend(label.user_id, rc)) ids.push_back(r.candidate_id);
    }
  }
  trial.it.cross_fraction = cross_community_fraction(trial.it.recommendations, labels);
  trial.kld.cross_fraction = cross_community_fraction(trial.kld.recommendations, labels);
  trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trial;
}

DiversityTrial run_trial(SynthSpec spec, EvaluationConfig cfg, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  spec.rng_seed = seed;
  cfg.model.rng_seed = seed;
  SynthCorpus synth = generate(spec);
  const Corpus corpus(std::move(synth.tweets), Tokenizer(StopwordList::builtin()), std::move(synth.profiles));
  DiversityTrial trial = evaluate_corpus(corpus, synth.labels, cfg);
  trial.seed = seed;
  trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trial;
}

json trial_to_json(const DiversityTrial& t) {
  return {{"seed", t.seed},
          {"cross_community_fraction", {{"IT", t.it.cross_fraction}, {"KLD", t.kld.cross_fraction}}},
          {"difference", t.it.cross_fraction - t.kld.cross_fraction},
          {"intermediary_topics", t.intermediary_topics},
          {"seconds", t.seconds}};
}

}  // namespace dataportraits::synth
