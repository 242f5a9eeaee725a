#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace dataportraits {

enum class TokenKind { hashtag, mention, word };

TokenKind classify(std::string_view surface);
std::string_view to_string(TokenKind kind);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);

  // One word per line; '#' starts a comment line. Throws on unreadable file.
  static StopwordList load(const std::filesystem::path& path);
  // Spanish + English list shipped with the project.
  static StopwordList builtin();

  bool contains(std::string_view folded_word) const;
  std::size_t size() const { return words_.size(); }
  // Sorted, for persistence alongside a corpus.
  std::vector<std::string> sorted() const;

 private:
  std::unordered_set<std::string> words_;
};

struct TweetEntities {
  std::vector<std::string> mentions;
  std::vector<std::string> hashtags;
  std::vector<std::string> urls;
};

// Turns micro-post text into interest tokens:
//  - hashtags and mentions are kept as single tokens ("#chile", "@juan");
//  - URLs reduce to domain plus first path segment ("emol.com/noticias");
//  - plain words are folded, stripped of punctuation and joined into
//    n-grams (n <= 3) with '_' ("new_york_city").
// Stopwords, hashtags, mentions, URLs and sentence punctuation all end a
// run of plain words, so no n-gram crosses them.
class Tokenizer {
 public:
  Tokenizer() = default;
  explicit Tokenizer(StopwordList stopwords, int max_ngram = 3)
      : stopwords_(std::move(stopwords)), max_ngram_(max_ngram) {}

  std::vector<std::string> tokenize(std::string_view text) const;

  // Mentions, hashtags and reduced URLs in order of appearance, without
  // n-gram expansion. Used when a record does not carry its own entities.
  TweetEntities entities(std::string_view text) const;

  const StopwordList& stopwords() const { return stopwords_; }

 private:
  StopwordList stopwords_;
  int max_ngram_ = 3;
};

}  // namespace dataportraits
