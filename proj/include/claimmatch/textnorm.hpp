#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace claimmatch {

using TokenList = std::vector<std::string>;

// Normalization settings. The stopword list is fixed at construction;
// normalize() is a pure function of (text, config).
struct NormConfig {
  std::unordered_set<std::string> stopwords;
  bool strip_handles = true;
  bool stem = true;

  // Stable fingerprint over the stopword list and flags, recorded in output
  // metadata so labeling runs can be tied to the exact list used.
  std::string fingerprint() const;
};

// Reads one stopword per line, UTF-8; '#'-prefixed comment lines and blank
// lines are ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

// Full tweet normalization pipeline, applied in this order:
//   1. lowercase (ASCII)
//   2. remove URLs (http(s)://... and bare t.co/... spans)
//   3. replace every digit run with the single token "0"
//   4. tweet-aware tokenize (hashtags, handles and emoticons kept as units,
//      words keep internal apostrophes, everything else splits off)
//   5. strip @handles
//   6. drop stopwords and punctuation-only tokens (no alphanumeric byte;
//      bytes >= 0x80 count as word characters), '#' prefixes are dropped
//      from hashtags before the stopword check
//   7. stem each surviving token
TokenList normalize(std::string_view text, const NormConfig& cfg);

// |unique(a) & unique(b)| / |unique(a) | unique(b)|; 0 when both sides are
// empty (an empty tweet cannot match anything).
double jaccard(const TokenList& a, const TokenList& b);

// Exposed for tests and the python bindings.
std::string lowercase_ascii(std::string_view text);
std::string remove_urls(const std::string& text);
std::string mask_digit_runs(const std::string& text);
std::vector<std::string> tweet_tokenize(std::string_view text);

}  // namespace claimmatch
