#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/textnorm.hpp"

namespace claimmatch {

struct Tweet {
  std::string id;
  std::string text;
  std::optional<std::string> in_reply_to;
  std::optional<std::string> conversation_root;
  std::vector<std::string> urls;  // resolved URLs carried by the tweet
};

struct FactCheckArticle {
  std::string url;  // canonical key
  std::string title;
  std::string subtitle;
  std::string claim;
  std::optional<std::string> date;
  std::optional<std::string> author;
};

// One fact-checking tweet together with the thread context it may verify.
struct ConversationTriple {
  Tweet fc_tweet;
  std::optional<Tweet> root;
  std::optional<Tweet> reply;
  std::string article_url;
};

// query -> article -> relevance (0/1)
struct Qrels {
  std::vector<std::string> query_order;
  std::unordered_map<std::string, std::unordered_map<std::string, int>>
      by_query;

  bool has_query(const std::string& qid) const {
    return by_query.contains(qid);
  }
  int relevance(const std::string& qid, const std::string& aid) const;
};

struct IngestStats {
  std::size_t total_lines = 0;
  std::size_t malformed = 0;
  std::size_t filtered = 0;
};

// Lowercases scheme and host, strips query string and fragment, removes the
// trailing slash. Articles are keyed by this form everywhere.
std::string canonical_url(std::string_view url);

// One JSON object per line with fields id/text/in_reply_to/conversation_root/
// urls. Malformed lines are skipped and counted; throws FormatError when more
// than half of the non-blank lines are malformed (wrong file). Tweets with
// empty text or linking to themselves are dropped; with require_urls set,
// tweets without any resolved URL are dropped too.
std::vector<Tweet> ingest_tweets(const std::string& path,
                                 IngestStats* stats = nullptr,
                                 bool require_urls = false);

std::vector<FactCheckArticle> load_articles_jsonl(const std::string& path);

// For every tweet whose urls intersect article_urls (canonical form), emits
// one triple per matching URL. Root and reply are resolved by id lookup over
// the same tweet list; absent ids become empty optionals.
std::vector<ConversationTriple> resolve_triples(
    std::span<const Tweet> tweets, const std::set<std::string>& article_urls);

// Extracts title/subtitle/claim/date/author from a stored page snapshot using
// selector rules with regex fallbacks. Never extracts article body or verdict.
// Throws ParseError if no title can be found.
FactCheckArticle parse_article_html(const std::string& html,
                                    const std::string& url);

struct CorpusStats {
  std::size_t unique_tweets = 0;
  double mean_words = 0.0;
  double median_words = 0.0;
  std::size_t max_words = 0;
  std::size_t vocab_size = 0;
};

// Token statistics over normalized tweet text. Uniqueness is by tweet id;
// median of an even-length sample is the mean of the two middle values.
CorpusStats corpus_stats(std::span<const Tweet> tweets, const NormConfig& cfg);

// qrels TSV: query_id<TAB>0<TAB>article_id<TAB>relevance
Qrels load_qrels(const std::string& path);
std::string format_qrels(const Qrels& qrels);

}  // namespace claimmatch
