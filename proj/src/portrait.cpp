#include "dataportraits/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "dataportraits/text.hpp"

namespace dataportraits {
namespace {

using nlohmann::json;

std::string canonical_keyword(std::string_view raw) {
  std::string s = text::fold(raw);
  std::replace(s.begin(), s.end(), ' ', '_');
  if (!s.empty() && s.front() == '#') s.erase(0, 1);
  return s;
}

double epoch_seconds(Timestamp t) { return static_cast<double>(t.time_since_epoch().count()); }

std::string format_epoch(double seconds) {
  return format_timestamp(TimestampMs{std::chrono::milliseconds{static_cast<std::int64_t>(std::llround(seconds * 1000.0))}});
}

}  // namespace

std::string_view kind_color(TokenKind kind) {
  switch (kind) {
    case TokenKind::hashtag: return kHashtagColor;
    case TokenKind::mention: return kMentionColor;
    case TokenKind::word: return kWordColor;
  }
  return kWordColor;
}

PoliticalKeywords::PoliticalKeywords(const std::vector<std::string>& keywords) {
  for (const auto& k : keywords) {
    std::string c = canonical_keyword(k);
    if (!c.empty()) keywords_.insert(std::move(c));
  }
}

PoliticalKeywords PoliticalKeywords::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read political keyword list " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    // "#" followed by a space starts a comment; "#tag" is a keyword.
    if (line[first] == '#' && (first + 1 >= line.size() || line[first + 1] == ' ')) continue;
    words.push_back(line.substr(first));
  }
  return PoliticalKeywords(words);
}

bool PoliticalKeywords::matches(std::string_view surface) const {
  if (keywords_.empty()) return false;
  return keywords_.count(canonical_keyword(surface)) != 0;
}

std::size_t sturges_bin_count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("histogram needs at least one value");
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)) + 1.0));
}

bool political_content(std::span<const InterestToken> interests, const PoliticalKeywords& political) {
  const std::size_t n = std::min(interests.size(), kPoliticalInterestWindow);
  for (std::size_t i = 0; i < n; ++i) {
    if (political.matches(interests[i].surface)) return true;
  }
  return false;
}

Portrait build_portrait(const UserDocument& doc, const Corpus& corpus, const PoliticalKeywords& political,
                        TimestampMs generated_at, std::size_t interest_limit) {
  const auto tweets = corpus.tweets_of(doc.user_id);
  if (tweets.empty()) throw std::invalid_argument("portrait undefined for a user without tweets");

  Portrait p;
  p.user_id = doc.user_id;
  p.generated_at = generated_at;
  if (const UserProfile* prof = corpus.profile(doc.user_id)) {
    p.display_name = prof->display_name;
    p.avatar_url = prof->avatar_url;
    p.bio = prof->bio;
  }
  if (p.display_name.empty()) p.display_name = doc.user_id;

  const auto interests = extract_interests(doc, corpus.vocabulary(), interest_limit);
  const double max_freq = interests.empty() ? 1.0 : static_cast<double>(interests.front().frequency);
  std::unordered_map<TokenId, std::size_t> interest_of;
  for (std::size_t i = 0; i < interests.size(); ++i) {
    p.interests.push_back({interests[i], interests[i].frequency / max_freq});
    interest_of.emplace(*corpus.vocabulary().find(interests[i].surface), i);
  }
  p.political_content = political_content(interests, political);

  // Tweets arrive chronologically from the corpus.
  const double first = epoch_seconds(tweets.front()->created_at);
  const double last = epoch_seconds(tweets.back()->created_at);
  const std::size_t k = sturges_bin_count(tweets.size());
  const double width = (last - first) / static_cast<double>(k);
  p.bins.resize(k);
  for (std::size_t b = 0; b < k; ++b) {
    p.bins[b].start = first + width * static_cast<double>(b);
    p.bins[b].end = b + 1 == k ? last : first + width * static_cast<double>(b + 1);
  }

  std::vector<std::vector<bool>> linked(interests.size(), std::vector<bool>(k, false));
  for (const TweetRecord* t : tweets) {
    PortraitTweet pt;
    pt.tweet_id = t->tweet_id;
    pt.text = t->text;
    pt.created_at = t->created_at;
    pt.popularity = t->popularity();
    const double offset = epoch_seconds(t->created_at) - first;
    if (width > 0) {
      pt.bin = std::min(k - 1, static_cast<std::size_t>(std::floor(offset / width)));
    } else {
      pt.bin = k - 1;
    }
    for (TokenId id : corpus.tweet_tokens(t->tweet_id)) {
      const auto it = interest_of.find(id);
      if (it == interest_of.end()) continue;
      if (std::find(pt.interests.begin(), pt.interests.end(), it->second) == pt.interests.end())
        pt.interests.push_back(it->second);
      linked[it->second][pt.bin] = true;
    }
    std::sort(pt.interests.begin(), pt.interests.end());
    p.tweets.push_back(std::move(pt));
  }

  for (auto& tweet : p.tweets) ++p.bins[tweet.bin].count;
  for (std::size_t b = 0; b < k; ++b) {
    if (auto top = bin_top_tweet(p, b)) {
      p.bins[b].top_tweet_id = top;
      p.bins[b].top_popularity = corpus.tweet(*top)->popularity();
    }
  }
  std::uint64_t max_pop = 0;
  for (const auto& bin : p.bins) max_pop = std::max(max_pop, bin.top_popularity);
  for (auto& bin : p.bins) {
    bin.circle_radius_hint =
        max_pop == 0 ? 1.0 : 0.5 + 0.5 * static_cast<double>(bin.top_popularity) / static_cast<double>(max_pop);
  }

  for (std::size_t w = 0; w < interests.size(); ++w)
    for (std::size_t b = 0; b < k; ++b)
      if (linked[w][b]) p.links.emplace_back(w, b);
  return p;
}

std::optional<std::string> bin_top_tweet(const Portrait& portrait, std::size_t bin, std::optional<std::size_t> interest) {
  const PortraitTweet* best = nullptr;
  for (const auto& t : portrait.tweets) {
    if (t.bin != bin) continue;
    if (interest && !std::binary_search(t.interests.begin(), t.interests.end(), *interest)) continue;
    // Chronological order means the first maximum is the earliest.
    if (best == nullptr || t.popularity > best->popularity) best = &t;
  }
  if (best == nullptr) return std::nullopt;
  return best->tweet_id;
}

json portrait_to_json(const Portrait& p) {
  json j;
  j["user_id"] = p.user_id;
  j["display_name"] = p.display_name;
  j["avatar_url"] = p.avatar_url;
  j["bio"] = p.bio;
  json interests = json::array();
  for (const auto& i : p.interests) {
    interests.push_back({{"surface", i.token.surface},
                         {"kind", std::string(to_string(i.token.kind))},
                         {"frequency", i.token.frequency},
                         {"weight", i.weight}});
  }
  j["interests"] = std::move(interests);
  json bins = json::array();
  for (const auto& b : p.bins) {
    bins.push_back({{"start", format_epoch(b.start)},
                    {"end", format_epoch(b.end)},
                    {"start_epoch", b.start},
                    {"end_epoch", b.end},
                    {"count", b.count},
                    {"top_tweet_id", b.top_tweet_id ? json(*b.top_tweet_id) : json(nullptr)},
                    {"top_popularity", b.top_popularity},
                    {"circle_radius_hint", b.circle_radius_hint}});
  }
  j["bins"] = std::move(bins);
  json links = json::array();
  for (const auto& [w, b] : p.links) links.push_back({{"interest", w}, {"bin", b}});
  j["links"] = std::move(links);
  json tweets = json::array();
  for (const auto& t : p.tweets) {
    tweets.push_back({{"tweet_id", t.tweet_id},
                      {"text", t.text},
                      {"created_at", format_timestamp(t.created_at)},
                      {"popularity", t.popularity},
                      {"bin", t.bin},
                      {"interests", t.interests}});
  }
  j["tweets"] = std::move(tweets);
  j["political_content"] = p.political_content;
  j["generated_at"] = format_timestamp(p.generated_at);
  j["kind_colors"] = {{"hashtag", kHashtagColor}, {"mention", kMentionColor}, {"word", kWordColor}};
  j["rotation_degrees"] = kWordRotationDegrees;
  return j;
}

}  // namespace dataportraits
