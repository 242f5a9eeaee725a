#include "dataportraits/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

#include "dataportraits/text.hpp"

namespace dataportraits {
namespace {

// Spanish and English function words, plus Twitter noise ("rt", "via").
constexpr const char* kBuiltinStopwords[] = {
    // es
    "a", "al", "algo", "algunas", "algunos", "ante", "antes", "aqui", "aquí", "asi", "así",
    "aun", "aún", "bien", "cada", "casi", "como", "cómo", "con", "contra", "cual", "cuál",
    "cuando", "cuándo", "de", "del", "desde", "donde", "dónde", "dos", "el", "él", "ella",
    "ellas", "ellos", "en", "entre", "era", "eran", "es", "esa", "esas", "ese", "eso", "esos",
    "esta", "está", "estaba", "estamos", "estan", "están", "estar", "estas", "estás", "este",
    "esto", "estos", "estoy", "fue", "fueron", "ha", "habia", "había", "han", "hasta", "hay",
    "la", "las", "le", "les", "lo", "los", "mas", "más", "me", "mi", "mis", "mismo", "mucho",
    "muy", "nada", "ni", "no", "nos", "nosotros", "o", "otra", "otro", "para", "pero", "poco",
    "por", "porque", "que", "qué", "quien", "quién", "se", "sea", "ser", "si", "sí", "sin",
    "sobre", "son", "su", "sus", "también", "tambien", "tan", "te", "tengo", "ti", "tiene",
    "todo", "todos", "tu", "tú", "tus", "un", "una", "uno", "unos", "unas", "vez", "y", "ya",
    "yo",
    // en
    "about", "after", "all", "am", "an", "and", "any", "are", "as", "at", "be", "been",
    "before", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from", "had",
    "has", "have", "he", "her", "here", "him", "his", "how", "i", "if", "in", "into", "is", "it",
    "its", "just", "me", "more", "my", "not", "of", "on", "or", "our", "out", "she", "so",
    "some", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this",
    "to", "too", "up", "us", "was", "we", "were", "what", "when", "where", "which", "who",
    "will", "with", "would", "you", "your",
    // twitter
    "rt", "via", "http", "https",
};

constexpr std::array<std::string_view, 40> kCommonTlds = {
    "com", "org", "net", "edu", "gov", "gob", "int", "info", "biz", "io", "co", "ly",
    "me", "tv", "fm", "cl", "ar", "pe", "mx", "es", "br", "uy", "bo", "ec", "ve", "py",
    "us", "uk", "de", "fr", "it", "ca", "au", "eu", "news", "app", "dev", "gl", "be", "to"};

bool is_sentence_punct(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?': case U'(': case U')':
    case U'[': case U']': case U'{': case U'}': case U'"': case U'“': case U'”':
    case U'«': case U'»': case U'¡': case U'¿': case U'…':
    case U'|':
      return true;
    default:
      return false;
  }
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool is_domain_label_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

bool is_common_tld(std::string_view tld) {
  return std::find(kCommonTlds.begin(), kCommonTlds.end(), tld) != kCommonTlds.end();
}

// Checks "label(.label)+" with an alphabetic final label.
bool valid_domain(std::string_view domain, std::string_view* tld_out) {
  if (domain.empty()) return false;
  std::size_t labels = 0;
  std::size_t start = 0;
  std::string_view last;
  while (true) {
    const std::size_t dot = domain.find('.', start);
    const std::string_view label = domain.substr(start, dot == std::string_view::npos ? dot : dot - start);
    if (label.empty()) return false;
    if (!std::all_of(label.begin(), label.end(), is_domain_label_char)) return false;
    ++labels;
    last = label;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (labels < 2 || last.size() < 2 || last.size() > 24) return false;
  if (!std::all_of(last.begin(), last.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
    return false;
  if (tld_out) *tld_out = last;
  return true;
}

std::string_view trim_trailing_punct(std::string_view s) {
  while (!s.empty()) {
    const char c = s.back();
    if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
        c == ']' || c == '"' || c == '\'' || c == '/')
      s.remove_suffix(1);
    else
      break;
  }
  return s;
}

// Returns the reduced "domain/segment" form, or empty if `chunk` is not a URL.
std::string reduce_url(std::string_view chunk) {
  std::string_view rest = chunk;
  bool explicit_url = false;
  if (starts_with(rest, "http://")) {
    rest.remove_prefix(7);
    explicit_url = true;
  } else if (starts_with(rest, "https://")) {
    rest.remove_prefix(8);
    explicit_url = true;
  }
  if (starts_with(rest, "www.")) {
    rest.remove_prefix(4);
    explicit_url = true;
  }
  const std::size_t end_host = rest.find_first_of("/?#");
  std::string_view host = rest.substr(0, end_host);
  const bool has_path = end_host != std::string_view::npos && rest[end_host] == '/';
  host = trim_trailing_punct(host);
  if (const auto colon = host.find(':'); colon != std::string_view::npos) host = host.substr(0, colon);

  std::string_view tld;
  if (!valid_domain(host, &tld)) return {};
  std::string_view segment;
  if (has_path) {
    segment = rest.substr(end_host + 1);
    segment = segment.substr(0, segment.find_first_of("/?#"));
    segment = trim_trailing_punct(segment);
  }
  if (!explicit_url && !has_path && !is_common_tld(tld)) return {};

  std::string out(host);
  if (!segment.empty()) {
    out.push_back('/');
    out.append(segment);
  } else if (!is_common_tld(tld)) {
    // Keeps the reduced form recognizable as a URL when re-tokenized.
    out.push_back('/');
  }
  return out;
}

struct Chunker {
  std::string_view text;
  std::size_t pos = 0;

  // Next whitespace-delimited chunk, or empty at end.
  std::string_view next() {
    while (pos < text.size()) {
      std::size_t p = pos;
      if (!text::is_space(text::next_code_point(text, p))) break;
      pos = p;
    }
    const std::size_t start = pos;
    while (pos < text.size()) {
      std::size_t p = pos;
      if (text::is_space(text::next_code_point(text, p))) break;
      pos = p;
    }
    return text.substr(start, pos - start);
  }
};

class Emitter {
 public:
  Emitter(const StopwordList& stopwords, int max_ngram, std::vector<std::string>& out)
      : stopwords_(stopwords), max_ngram_(max_ngram), out_(out) {}

  void word(std::string w) {
    if (w.empty()) return;
    if (stopwords_.contains(w)) {
      flush();
      return;
    }
    run_.push_back(std::move(w));
  }

  void single(std::string token) {
    flush();
    out_.push_back(std::move(token));
  }

  void flush() {
    for (int n = 1; n <= max_ngram_; ++n) {
      if (run_.size() < static_cast<std::size_t>(n)) break;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= run_.size(); ++i) {
        std::string gram = run_[i];
        for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j) {
          gram.push_back('_');
          gram.append(run_[i + j]);
        }
        out_.push_back(std::move(gram));
      }
    }
    run_.clear();
  }

 private:
  const StopwordList& stopwords_;
  int max_ngram_;
  std::vector<std::string>& out_;
  std::vector<std::string> run_;
};

// Strips leading characters that are neither word characters nor sigils.
// Returns true if a sentence-breaking character was skipped.
bool strip_leading(std::string_view& chunk) {
  bool broke = false;
  std::size_t pos = 0;
  while (pos < chunk.size()) {
    std::size_t p = pos;
    const char32_t cp = text::next_code_point(chunk, p);
    if (text::is_word_char(cp) || cp == U'#' || cp == U'@') break;
    broke = broke || is_sentence_punct(cp);
    pos = p;
  }
  chunk.remove_prefix(pos);
  return broke;
}

// Reads a sigil token ("#name" / "@name"); empty if no word chars follow.
std::string read_sigil(std::string_view chunk) {
  std::string out(1, chunk[0]);
  std::size_t pos = 1;
  while (pos < chunk.size()) {
    std::size_t p = pos;
    const char32_t cp = text::next_code_point(chunk, p);
    if (!text::is_word_char(cp)) break;
    text::append_utf8(out, cp);
    pos = p;
  }
  return out.size() > 1 ? out : std::string{};
}

template <typename OnUrl, typename OnSigil, typename OnWord, typename OnBreak>
void scan(std::string_view folded, OnUrl on_url, OnSigil on_sigil, OnWord on_word, OnBreak on_break) {
  Chunker chunker{folded};
  for (std::string_view chunk = chunker.next(); !chunk.empty(); chunk = chunker.next()) {
    if (strip_leading(chunk)) on_break();
    if (chunk.empty()) {
      on_break();
      continue;
    }
    if (std::string url = reduce_url(chunk); !url.empty()) {
      on_url(std::move(url));
      continue;
    }
    if (chunk[0] == '#' || chunk[0] == '@') {
      if (std::string sigil = read_sigil(chunk); !sigil.empty())
        on_sigil(std::move(sigil));
      else
        on_break();
      continue;
    }
    std::string current;
    bool pending_apostrophe = false;
    for (std::size_t pos = 0; pos < chunk.size();) {
      const char32_t cp = text::next_code_point(chunk, pos);
      if (text::is_word_char(cp)) {
        text::append_utf8(current, cp);
        pending_apostrophe = false;
      } else if (is_apostrophe(cp) && !current.empty()) {
        pending_apostrophe = true;
      } else {
        if (!current.empty()) on_word(std::move(current));
        current.clear();
        if (is_sentence_punct(cp)) on_break();
        pending_apostrophe = false;
      }
    }
    if (pending_apostrophe && !current.empty()) {
      on_word(std::move(current));
      current.clear();
    }
    if (!current.empty()) on_word(std::move(current));
  }
}

}  // namespace

TokenKind classify(std::string_view surface) {
  if (!surface.empty() && surface.front() == '#') return TokenKind::hashtag;
  if (!surface.empty() && surface.front() == '@') return TokenKind::mention;
  return TokenKind::word;
}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::hashtag: return "hashtag";
    case TokenKind::mention: return "mention";
    case TokenKind::word: return "word";
  }
  return "word";
}

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (!w.empty()) words_.insert(text::fold(w));
  }
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read stopword file: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    words.push_back(line.substr(first));
  }
  return StopwordList(words);
}

StopwordList StopwordList::builtin() {
  return StopwordList(std::vector<std::string>(std::begin(kBuiltinStopwords),
                                               std::end(kBuiltinStopwords)));
}

bool StopwordList::contains(std::string_view folded_word) const {
  return words_.find(std::string(folded_word)) != words_.end();
}

std::vector<std::string> StopwordList::sorted() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view input) const {
  std::vector<std::string> out;
  if (input.empty()) return out;
  const std::string folded = text::fold(input);
  Emitter emit(stopwords_, max_ngram_, out);
  scan(
      folded, [&](std::string url) { emit.single(std::move(url)); },
      [&](std::string sigil) { emit.single(std::move(sigil)); },
      [&](std::string word) { emit.word(std::move(word)); }, [&] { emit.flush(); });
  emit.flush();
  return out;
}

TweetEntities Tokenizer::entities(std::string_view input) const {
  TweetEntities out;
  if (input.empty()) return out;
  const std::string folded = text::fold(input);
  scan(
      folded, [&](std::string url) { out.urls.push_back(std::move(url)); },
      [&](std::string sigil) {
        if (sigil[0] == '#')
          out.hashtags.push_back(std::move(sigil));
        else
          out.mentions.push_back(std::move(sigil));
      },
      [](std::string) {}, [] {});
  return out;
}

}  // namespace dataportraits
