#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "dataportraits/corpus.hpp"
#include "dataportraits/time.hpp"

namespace fixtures {

inline dataportraits::TweetRecord tweet(std::string id, std::string user, std::string text, const std::string& iso,
                                        std::uint64_t retweets = 0, std::uint64_t favorites = 0) {
  dataportraits::TweetRecord t;
  t.tweet_id = std::move(id);
  t.user_id = std::move(user);
  t.text = std::move(text);
  t.created_at = dataportraits::parse_timestamp(iso);
  t.retweet_count = retweets;
  t.favorite_count = favorites;
  return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dataportraits_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
