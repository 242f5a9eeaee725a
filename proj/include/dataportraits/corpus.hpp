#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dataportraits/time.hpp"
#include "dataportraits/tokenizer.hpp"

namespace dataportraits {

using TokenId = std::uint32_t;

struct TweetRecord {
  std::string tweet_id;
  std::string user_id;
  std::string text;
  Timestamp created_at{};
  std::uint64_t retweet_count = 0;
  std::uint64_t favorite_count = 0;
  bool is_retweet = false;
  std::vector<std::string> mentions;
  std::vector<std::string> hashtags;
  std::vector<std::string> urls;

  std::uint64_t popularity() const { return retweet_count + favorite_count; }
};

// Optional account metadata. Tweets alone cannot supply these.
struct UserProfile {
  std::string user_id;
  std::string display_name;
  std::string avatar_url;
  std::string bio;
  double follower_count = 0;
  double following_count = 0;
  std::optional<double> account_age_days;
  std::vector<std::string> following;
};

struct InterestToken {
  std::string surface;
  TokenKind kind = TokenKind::word;
  std::uint32_t frequency = 0;

  bool operator==(const InterestToken&) const = default;
};

struct UserDocument {
  std::string user_id;
  // Sorted by token id; counts sum over the user's tweets.
  std::vector<std::pair<TokenId, std::uint32_t>> tokens;
  // Chronological, ties by tweet id.
  std::vector<std::string> tweet_ids;
  std::vector<InterestToken> interests;
  double follower_count = 0;
  double following_count = 0;
  double account_age_days = 0;

  std::uint64_t total_tokens() const;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> sorted_surfaces);

  std::optional<TokenId> find(std::string_view surface) const;
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  std::size_t size() const { return surfaces_.size(); }
  const std::vector<std::string>& surfaces() const { return surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
};

inline constexpr std::size_t kDefaultInterestLimit = 300;

// Frequency-descending, ties broken by surface in byte order.
std::vector<InterestToken> extract_interests(const UserDocument& doc, const Vocabulary& vocab,
                                             std::size_t limit = kDefaultInterestLimit);

// Throws std::invalid_argument when a required field is missing or invalid.
// Missing entity lists are extracted from the text.
TweetRecord parse_tweet(std::string_view json_line, const Tokenizer& tokenizer);
std::string serialize_tweet(const TweetRecord& tweet);

UserProfile parse_profile(std::string_view json_line);
std::string serialize_profile(const UserProfile& profile);

// Immutable after construction; safe to share between readers.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<TweetRecord> tweets, Tokenizer tokenizer,
         std::vector<UserProfile> profiles = {});

  const std::vector<TweetRecord>& tweets() const { return tweets_; }
  const std::vector<UserDocument>& documents() const { return documents_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

  const UserDocument* document(std::string_view user_id) const;
  const TweetRecord* tweet(std::string_view tweet_id) const;
  const UserProfile* profile(std::string_view user_id) const;
  // Token ids of one tweet, in tokenizer order (with repeats).
  const std::vector<TokenId>& tweet_tokens(std::string_view tweet_id) const;
  std::vector<const TweetRecord*> tweets_of(std::string_view user_id) const;

  // Latest tweet time in the corpus; the reference "now" for candidate windows.
  Timestamp reference_time() const { return reference_time_; }
  Timestamp last_activity(std::string_view user_id) const;

  std::size_t user_count() const { return documents_.size(); }
  std::size_t tweet_count() const { return tweets_.size(); }

  // One line per document, deterministic byte-for-byte.
  std::string serialize_documents() const;

 private:
  std::vector<TweetRecord> tweets_;
  Tokenizer tokenizer_;
  std::vector<UserProfile> profiles_;
  Vocabulary vocabulary_;
  std::vector<UserDocument> documents_;
  std::vector<std::vector<TokenId>> tweet_tokens_;
  std::unordered_map<std::string, std::size_t> tweet_index_;
  std::unordered_map<std::string, std::size_t> document_index_;
  std::unordered_map<std::string, std::size_t> profile_index_;
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> user_tweet_range_;
  Timestamp reference_time_{};
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  // First few problems, "line N: reason".
  std::vector<std::string> warnings;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

// Reads NDJSON tweets. An unreadable file throws std::runtime_error; malformed
// lines and duplicate tweet ids are skipped and counted.
IngestResult ingest(const std::filesystem::path& path, const Tokenizer& tokenizer,
                    const std::filesystem::path& profiles_path = {});
IngestResult ingest_lines(std::string_view ndjson, const Tokenizer& tokenizer,
                          std::vector<UserProfile> profiles = {});

// Corpus directory layout: manifest.json, stopwords.txt, tweets.ndjson,
// profiles.ndjson, vocabulary.txt, documents.ndjson.
void save_corpus(const Corpus& corpus, const IngestReport& report,
                 const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace dataportraits
