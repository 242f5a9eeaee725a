#include "dataportraits/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dataportraits/text.hpp"

namespace dataportraits {
namespace {

using nlohmann::json;

constexpr int kCorpusFormatVersion = 1;
constexpr std::size_t kMaxTextCodePoints = 280;
constexpr std::size_t kMaxWarnings = 20;

std::string require_string(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_string())
    throw std::invalid_argument(std::string("missing or non-string field '") + field + "'");
  return it->get<std::string>();
}

std::uint64_t optional_count(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return 0;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    const auto v = it->get<std::int64_t>();
    if (v < 0) throw std::invalid_argument(std::string("negative '") + field + "'");
    return static_cast<std::uint64_t>(v);
  }
  throw std::invalid_argument(std::string("non-integer field '") + field + "'");
}

std::optional<std::vector<std::string>> optional_list(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) throw std::invalid_argument(std::string("field '") + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename F>
void for_each_line(std::string_view data, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string_view::npos) end = data.size();
    std::string_view line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    f(line_no, line);
    start = end + 1;
  }
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path) {
  std::vector<UserProfile> out;
  const std::string data = read_file(path);
  for_each_line(data, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    try {
      out.push_back(parse_profile(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace

std::uint64_t UserDocument::total_tokens() const {
  std::uint64_t total = 0;
  for (const auto& [id, count] : tokens) total += count;
  return total;
}

Vocabulary::Vocabulary(std::vector<std::string> sorted_surfaces) : surfaces_(std::move(sorted_surfaces)) {
  ids_.reserve(surfaces_.size());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    if (!ids_.emplace(surfaces_[i], static_cast<TokenId>(i)).second)
      throw std::invalid_argument("duplicate vocabulary surface: " + surfaces_[i]);
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  const auto it = ids_.find(std::string(surface));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<InterestToken> extract_interests(const UserDocument& doc, const Vocabulary& vocab,
                                             std::size_t limit) {
  if (limit == 0) throw std::invalid_argument("interest limit must be >= 1");
  std::vector<InterestToken> all;
  all.reserve(doc.tokens.size());
  for (const auto& [id, count] : doc.tokens) {
    const std::string& surface = vocab.surface(id);
    all.push_back({surface, classify(surface), count});
  }
  const auto by_rank = [](const InterestToken& a, const InterestToken& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.surface < b.surface;
  };
  if (all.size() > limit) {
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(limit), all.end(), by_rank);
    all.resize(limit);
  } else {
    std::sort(all.begin(), all.end(), by_rank);
  }
  return all;
}

TweetRecord parse_tweet(std::string_view json_line, const Tokenizer& tokenizer) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("tweet must be a JSON object");

  TweetRecord t;
  t.tweet_id = require_string(j, "tweet_id");
  t.user_id = require_string(j, "user_id");
  t.text = require_string(j, "text");
  if (t.tweet_id.empty() || t.user_id.empty()) throw std::invalid_argument("empty tweet_id or user_id");
  if (text::code_point_count(t.text) > kMaxTextCodePoints)
    throw std::invalid_argument("text longer than 280 code points");
  t.created_at = parse_timestamp(require_string(j, "created_at"));
  t.retweet_count = optional_count(j, "retweet_count");
  t.favorite_count = optional_count(j, "favorite_count");
  if (const auto it = j.find("is_retweet"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw std::invalid_argument("is_retweet must be boolean");
    t.is_retweet = it->get<bool>();
  }

  auto mentions = optional_list(j, "mentions");
  auto hashtags = optional_list(j, "hashtags");
  auto urls = optional_list(j, "urls");
  if (!mentions || !hashtags || !urls) {
    TweetEntities found = tokenizer.entities(t.text);
    if (!mentions) mentions = std::move(found.mentions);
    if (!hashtags) hashtags = std::move(found.hashtags);
    if (!urls) urls = std::move(found.urls);
  }
  t.mentions = std::move(*mentions);
  t.hashtags = std::move(*hashtags);
  t.urls = std::move(*urls);
  return t;
}

std::string serialize_tweet(const TweetRecord& t) {
  json j = json::object();
  j["tweet_id"] = t.tweet_id;
  j["user_id"] = t.user_id;
  j["text"] = t.text;
  j["created_at"] = format_timestamp(t.created_at);
  j["retweet_count"] = t.retweet_count;
  j["favorite_count"] = t.favorite_count;
  j["is_retweet"] = t.is_retweet;
  j["mentions"] = t.mentions;
  j["hashtags"] = t.hashtags;
  j["urls"] = t.urls;
  return j.dump();
}

UserProfile parse_profile(std::string_view json_line) {
  const json j = json::parse(json_line);
  if (!j.is_object()) throw std::invalid_argument("profile must be a JSON object");
  UserProfile p;
  p.user_id = require_string(j, "user_id");
  p.display_name = j.value("display_name", std::string{});
  p.avatar_url = j.value("avatar_url", std::string{});
  p.bio = j.value("bio", std::string{});
  p.follower_count = j.value("follower_count", 0.0);
  p.following_count = j.value("following_count", 0.0);
  if (p.follower_count < 0 || p.following_count < 0)
    throw std::invalid_argument("negative follower/following count");
  if (const auto it = j.find("account_age_days"); it != j.end() && !it->is_null()) {
    p.account_age_days = it->get<double>();
    if (*p.account_age_days < 0) throw std::invalid_argument("negative account_age_days");
  }
  if (auto following = optional_list(j, "following")) p.following = std::move(*following);
  return p;
}

std::string serialize_profile(const UserProfile& p) {
  json j = json::object();
  j["user_id"] = p.user_id;
  j["display_name"] = p.display_name;
  j["avatar_url"] = p.avatar_url;
  j["bio"] = p.bio;
  j["follower_count"] = p.follower_count;
  j["following_count"] = p.following_count;
  j["account_age_days"] = p.account_age_days ? json(*p.account_age_days) : json(nullptr);
  j["following"] = p.following;
  return j.dump();
}

Corpus::Corpus(std::vector<TweetRecord> tweets, Tokenizer tokenizer, std::vector<UserProfile> profiles)
    : tweets_(std::move(tweets)), tokenizer_(std::move(tokenizer)), profiles_(std::move(profiles)) {
  std::sort(tweets_.begin(), tweets_.end(), [](const TweetRecord& a, const TweetRecord& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.tweet_id < b.tweet_id;
  });
  std::sort(profiles_.begin(), profiles_.end(),
            [](const UserProfile& a, const UserProfile& b) { return a.user_id < b.user_id; });
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (!profile_index_.emplace(profiles_[i].user_id, i).second)
      throw std::invalid_argument("duplicate profile for user " + profiles_[i].user_id);
  }

  std::vector<std::vector<std::string>> surfaces(tweets_.size());
  std::vector<std::string> all_surfaces;
  for (std::size_t i = 0; i < tweets_.size(); ++i) {
    if (!tweet_index_.emplace(tweets_[i].tweet_id, i).second)
      throw std::invalid_argument("duplicate tweet id " + tweets_[i].tweet_id);
    surfaces[i] = tokenizer_.tokenize(tweets_[i].text);
    all_surfaces.insert(all_surfaces.end(), surfaces[i].begin(), surfaces[i].end());
    reference_time_ = std::max(reference_time_, tweets_[i].created_at);
  }
  std::sort(all_surfaces.begin(), all_surfaces.end());
  all_surfaces.erase(std::unique(all_surfaces.begin(), all_surfaces.end()), all_surfaces.end());
  vocabulary_ = Vocabulary(std::move(all_surfaces));

  tweet_tokens_.resize(tweets_.size());
  for (std::size_t i = 0; i < tweets_.size(); ++i) {
    tweet_tokens_[i].reserve(surfaces[i].size());
    for (const auto& s : surfaces[i]) tweet_tokens_[i].push_back(*vocabulary_.find(s));
  }

  for (std::size_t begin = 0; begin < tweets_.size();) {
    std::size_t end = begin;
    while (end < tweets_.size() && tweets_[end].user_id == tweets_[begin].user_id) ++end;

    UserDocument doc;
    doc.user_id = tweets_[begin].user_id;
    std::map<TokenId, std::uint32_t> counts;
    for (std::size_t i = begin; i < end; ++i) {
      doc.tweet_ids.push_back(tweets_[i].tweet_id);
      for (TokenId id : tweet_tokens_[i]) ++counts[id];
    }
    doc.tokens.assign(counts.begin(), counts.end());
    doc.interests = extract_interests(doc, vocabulary_);

    const double span_days =
        std::chrono::duration<double>(tweets_[end - 1].created_at - tweets_[begin].created_at).count() / 86400.0;
    doc.account_age_days = std::max(1.0, std::ceil(span_days));
    if (const UserProfile* p = profile(doc.user_id)) {
      doc.follower_count = p->follower_count;
      doc.following_count = p->following_count;
      if (p->account_age_days) doc.account_age_days = *p->account_age_days;
    }

    user_tweet_range_.emplace(doc.user_id, std::make_pair(begin, end));
    document_index_.emplace(doc.user_id, documents_.size());
    documents_.push_back(std::move(doc));
    begin = end;
  }
}

const UserDocument* Corpus::document(std::string_view user_id) const {
  const auto it = document_index_.find(std::string(user_id));
  return it == document_index_.end() ? nullptr : &documents_[it->second];
}

const TweetRecord* Corpus::tweet(std::string_view tweet_id) const {
  const auto it = tweet_index_.find(std::string(tweet_id));
  return it == tweet_index_.end() ? nullptr : &tweets_[it->second];
}

const UserProfile* Corpus::profile(std::string_view user_id) const {
  const auto it = profile_index_.find(std::string(user_id));
  return it == profile_index_.end() ? nullptr : &profiles_[it->second];
}

const std::vector<TokenId>& Corpus::tweet_tokens(std::string_view tweet_id) const {
  const auto it = tweet_index_.find(std::string(tweet_id));
  if (it == tweet_index_.end()) throw std::out_of_range("unknown tweet " + std::string(tweet_id));
  return tweet_tokens_[it->second];
}

std::vector<const TweetRecord*> Corpus::tweets_of(std::string_view user_id) const {
  std::vector<const TweetRecord*> out;
  const auto it = user_tweet_range_.find(std::string(user_id));
  if (it == user_tweet_range_.end()) return out;
  for (std::size_t i = it->second.first; i < it->second.second; ++i) out.push_back(&tweets_[i]);
  return out;
}

Timestamp Corpus::last_activity(std::string_view user_id) const {
  const auto it = user_tweet_range_.find(std::string(user_id));
  if (it == user_tweet_range_.end()) throw std::out_of_range("unknown user " + std::string(user_id));
  return tweets_[it->second.second - 1].created_at;
}

std::string Corpus::serialize_documents() const {
  std::string out;
  for (const auto& doc : documents_) {
    json j = json::object();
    j["user_id"] = doc.user_id;
    json tokens = json::array();
    for (const auto& [id, count] : doc.tokens) tokens.push_back({vocabulary_.surface(id), count});
    j["tokens"] = std::move(tokens);
    j["tweet_ids"] = doc.tweet_ids;
    json interests = json::array();
    for (const auto& it : doc.interests)
      interests.push_back({{"surface", it.surface}, {"kind", to_string(it.kind)}, {"frequency", it.frequency}});
    j["interests"] = std::move(interests);
    j["follower_count"] = doc.follower_count;
    j["following_count"] = doc.following_count;
    j["account_age_days"] = doc.account_age_days;
    out += j.dump();
    out += '\n';
  }
  return out;
}

IngestResult ingest_lines(std::string_view ndjson, const Tokenizer& tokenizer,
                          std::vector<UserProfile> profiles) {
  IngestReport report;
  std::vector<TweetRecord> tweets;
  std::unordered_map<std::string, std::size_t> seen;
  const auto warn = [&](std::size_t line_no, const std::string& why) {
    ++report.skipped;
    if (report.warnings.size() < kMaxWarnings)
      report.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
  };
  for_each_line(ndjson, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    ++report.lines;
    try {
      TweetRecord t = parse_tweet(line, tokenizer);
      if (!seen.emplace(t.tweet_id, line_no).second) {
        warn(line_no, "duplicate tweet_id " + t.tweet_id);
        return;
      }
      tweets.push_back(std::move(t));
    } catch (const std::exception& e) {
      warn(line_no, e.what());
    }
  });
  report.loaded = tweets.size();
  return {Corpus(std::move(tweets), tokenizer, std::move(profiles)), std::move(report)};
}

IngestResult ingest(const std::filesystem::path& path, const Tokenizer& tokenizer,
                    const std::filesystem::path& profiles_path) {
  const std::string data = read_file(path);
  std::vector<UserProfile> profiles;
  if (!profiles_path.empty()) profiles = load_profiles(profiles_path);
  return ingest_lines(data, tokenizer, std::move(profiles));
}

void save_corpus(const Corpus& corpus, const IngestReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest = {{"format_version", kCorpusFormatVersion},
                   {"tweets", corpus.tweet_count()},
                   {"users", corpus.user_count()},
                   {"vocabulary", corpus.vocabulary().size()},
                   {"lines", report.lines},
                   {"skipped", report.skipped},
                   {"reference_time", format_timestamp(corpus.reference_time())}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::string stop;
  for (const auto& w : corpus.tokenizer().stopwords().sorted()) stop += w + "\n";
  write_file(dir / "stopwords.txt", stop);

  std::string tweets;
  for (const auto& t : corpus.tweets()) tweets += serialize_tweet(t) + "\n";
  write_file(dir / "tweets.ndjson", tweets);

  std::string profiles;
  for (const auto& doc : corpus.documents()) {
    if (const UserProfile* p = corpus.profile(doc.user_id)) profiles += serialize_profile(*p) + "\n";
  }
  write_file(dir / "profiles.ndjson", profiles);

  std::string vocab;
  for (const auto& s : corpus.vocabulary().surfaces()) vocab += s + "\n";
  write_file(dir / "vocabulary.txt", vocab);

  write_file(dir / "documents.ndjson", corpus.serialize_documents());
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("format_version", 0) != kCorpusFormatVersion)
    throw std::runtime_error("unsupported corpus format in " + dir.string());
  Tokenizer tokenizer(StopwordList::load(dir / "stopwords.txt"));
  std::vector<UserProfile> profiles;
  if (std::filesystem::exists(dir / "profiles.ndjson")) profiles = load_profiles(dir / "profiles.ndjson");
  IngestResult result = ingest_lines(read_file(dir / "tweets.ndjson"), tokenizer, std::move(profiles));
  if (result.report.skipped != 0)
    throw std::runtime_error("corrupt corpus directory " + dir.string() + ": " + result.report.warnings.front());
  return std::move(result.corpus);
}

}  // namespace dataportraits
