#include "claimmatch/textnorm.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <unordered_set>

#include "claimmatch/errors.hpp"
#include "claimmatch/porter.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {
namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_word_byte(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  if (u >= 0x80) return true;  // UTF-8 continuation/lead bytes stay in words
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || is_ascii_digit(c);
}

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Small fixed emoticon set, matched longest-first so ":-)" beats ":".
constexpr std::array<std::string_view, 22> kEmoticons = {
    ":-)", ":-(", ":-d", ":-p", ":-/", ":-|", ";-)", "=)",  "=(",
    ":)",  ":(",  ":d",  ":p",  ":/",  ":|",  ";)",  ":o",  ";(",
    "<3",  ":'(", "xd",  ":*",
};

std::size_t match_emoticon(std::string_view text, std::size_t pos) {
  for (std::string_view e : kEmoticons) {
    if (text.substr(pos, e.size()) == e) {
      // require a boundary so "xd" inside a word does not match
      std::size_t end = pos + e.size();
      bool left_ok = pos == 0 || !is_word_byte(text[pos - 1]);
      bool right_ok = end == text.size() || !is_word_byte(text[end]);
      if (left_ok && right_ok) return e.size();
    }
  }
  return 0;
}

bool punctuation_only(std::string_view token) {
  return std::none_of(token.begin(), token.end(), is_word_byte);
}

}  // namespace

std::string NormConfig::fingerprint() const {
  std::vector<std::string> sorted(stopwords.begin(), stopwords.end());
  std::sort(sorted.begin(), sorted.end());
  std::string blob;
  for (const auto& w : sorted) {
    blob += w;
    blob += '\n';
  }
  blob += strip_handles ? "strip_handles=1\n" : "strip_handles=0\n";
  blob += stem ? "stem=1\n" : "stem=0\n";
  return to_hex(fnv1a64(blob));
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace(t);
  }
  return out;
}

std::string lowercase_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string remove_urls(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto url_len = [&](std::size_t pos) -> std::size_t {
    std::size_t len = 0;
    std::string_view rest(text.data() + pos, n - pos);
    if (rest.starts_with("http://") || rest.starts_with("https://")) {
      len = rest.find("http://") == 0 ? 7 : 8;
    } else if (rest.starts_with("t.co/")) {
      // bare t.co span only at a word boundary
      if (pos != 0 && is_word_byte(text[pos - 1])) return 0;
      len = 5;
    } else {
      return 0;
    }
    while (pos + len < n && !is_space_byte(text[pos + len])) ++len;
    return len;
  };
  while (i < n) {
    std::size_t len = url_len(i);
    if (len > 0) {
      i += len;
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

std::string mask_digit_runs(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ascii_digit(text[i])) {
      out.push_back('0');
      while (i < text.size() && is_ascii_digit(text[i])) ++i;
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> tweet_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (is_space_byte(text[i])) {
      ++i;
      continue;
    }
    if (std::size_t elen = match_emoticon(text, i); elen > 0) {
      tokens.emplace_back(text.substr(i, elen));
      i += elen;
      continue;
    }
    char c = text[i];
    if ((c == '@' || c == '#') && i + 1 < n && is_word_byte(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < n && (is_word_byte(text[j]) || text[j] == '_')) ++j;
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < n && (is_word_byte(text[j]) || text[j] == '_')) ++j;
      // keep word-internal apostrophes ("don't" stays one token)
      while (j < n && text[j] == '\'' && j + 1 < n &&
             is_word_byte(text[j + 1])) {
        ++j;
        while (j < n && (is_word_byte(text[j]) || text[j] == '_')) ++j;
      }
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    // run of other symbols becomes one (punctuation-only) token
    std::size_t j = i;
    while (j < n && !is_space_byte(text[j]) && !is_word_byte(text[j]) &&
           text[j] != '@' && text[j] != '#' && match_emoticon(text, j) == 0) {
      ++j;
    }
    if (j == i) ++j;
    tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

TokenList normalize(std::string_view text, const NormConfig& cfg) {
  std::string lowered = lowercase_ascii(text);
  std::string no_urls = remove_urls(lowered);
  std::string masked = mask_digit_runs(no_urls);
  std::vector<std::string> raw = tweet_tokenize(masked);

  TokenList out;
  out.reserve(raw.size());
  for (std::string& tok : raw) {
    if (cfg.strip_handles && tok.size() > 1 && tok.front() == '@') continue;
    if (tok.size() > 1 && tok.front() == '#') tok.erase(tok.begin());
    if (punctuation_only(tok)) continue;
    if (cfg.stopwords.contains(tok)) continue;
    out.push_back(cfg.stem ? porter_stem(tok) : std::move(tok));
  }
  return out;
}

double jaccard(const TokenList& a, const TokenList& b) {
  std::unordered_set<std::string> sa(a.begin(), a.end());
  std::unordered_set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) {
    if (sb.contains(t)) ++inter;
  }
  std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace claimmatch
