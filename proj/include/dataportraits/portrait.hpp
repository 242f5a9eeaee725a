#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dataportraits/corpus.hpp"

namespace dataportraits {

// Word-cloud colors by token kind, and the fixed word rotation.
inline constexpr std::string_view kHashtagColor = "#7570b3";
inline constexpr std::string_view kMentionColor = "#d95f02";
inline constexpr std::string_view kWordColor = "#1b9e77";
inline constexpr double kWordRotationDegrees = -7.0;
inline constexpr std::size_t kPoliticalInterestWindow = 50;

std::string_view kind_color(TokenKind kind);

// Case-folded keyword set. Entries match interests with or without a leading
// '#'; spaces inside an entry stand for the '_' n-gram joiner.
class PoliticalKeywords {
 public:
  PoliticalKeywords() = default;
  explicit PoliticalKeywords(const std::vector<std::string>& keywords);
  static PoliticalKeywords load(const std::filesystem::path& path);

  bool matches(std::string_view surface) const;
  std::size_t size() const { return keywords_.size(); }

 private:
  std::unordered_set<std::string> keywords_;
};

struct PortraitInterest {
  InterestToken token;
  double weight = 0;  // frequency / max frequency, in (0, 1]
};

struct HistogramBin {
  // Epoch seconds; bins are equal width and the last one closes at the latest tweet.
  double start = 0;
  double end = 0;
  std::uint32_t count = 0;
  std::optional<std::string> top_tweet_id;
  std::uint64_t top_popularity = 0;
  double circle_radius_hint = 1.0;
};

struct PortraitTweet {
  std::string tweet_id;
  std::string text;
  Timestamp created_at{};
  std::uint64_t popularity = 0;
  std::size_t bin = 0;
  std::vector<std::size_t> interests;  // indices into Portrait::interests
};

struct Portrait {
  std::string user_id;
  std::string display_name;
  std::string avatar_url;
  std::string bio;
  std::vector<PortraitInterest> interests;
  std::vector<HistogramBin> bins;
  std::vector<std::pair<std::size_t, std::size_t>> links;  // (interest, bin), sorted
  std::vector<PortraitTweet> tweets;                       // chronological
  bool political_content = false;
  TimestampMs generated_at{};
};

// ceil(log2(n) + 1); n must be >= 1.
std::size_t sturges_bin_count(std::size_t n);

// Throws std::invalid_argument when the document has no tweets.
Portrait build_portrait(const UserDocument& doc, const Corpus& corpus, const PoliticalKeywords& political,
                        TimestampMs generated_at, std::size_t interest_limit = kDefaultInterestLimit);

// Most popular tweet of a bin, optionally restricted to tweets containing an
// interest. Ties go to the earlier tweet, then the smaller id.
std::optional<std::string> bin_top_tweet(const Portrait& portrait, std::size_t bin,
                                         std::optional<std::size_t> interest = std::nullopt);

bool political_content(std::span<const InterestToken> interests, const PoliticalKeywords& political);

nlohmann::json portrait_to_json(const Portrait& p);

}  // namespace dataportraits
