#include "claimmatch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "claimmatch/errors.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

using json = nlohmann::json;

int Qrels::relevance(const std::string& qid, const std::string& aid) const {
  auto qit = by_query.find(qid);
  if (qit == by_query.end()) return 0;
  auto ait = qit->second.find(aid);
  return ait == qit->second.end() ? 0 : ait->second;
}

std::string canonical_url(std::string_view url) {
  std::string s{trim(url)};
  // find scheme
  auto scheme_end = s.find("://");
  std::size_t host_start = 0;
  if (scheme_end != std::string::npos) {
    for (std::size_t i = 0; i < scheme_end; ++i)
      s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
    host_start = scheme_end + 3;
  }
  auto path_start = s.find('/', host_start);
  auto host_end = path_start == std::string::npos ? s.size() : path_start;
  for (std::size_t i = host_start; i < host_end; ++i)
    s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
  auto cut = s.find_first_of("?#");
  if (cut != std::string::npos) s.resize(cut);
  while (s.size() > host_end && s.back() == '/') s.pop_back();
  return s;
}

namespace {

std::optional<std::string> opt_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw json::type_error::create(302, "string", &obj);
  auto s = it->get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

Tweet parse_tweet_json(const json& obj) {
  Tweet t;
  t.id = obj.at("id").is_string() ? obj.at("id").get<std::string>()
                                  : std::to_string(obj.at("id").get<long long>());
  t.text = obj.at("text").get<std::string>();
  t.in_reply_to = opt_string(obj, "in_reply_to");
  t.conversation_root = opt_string(obj, "conversation_root");
  if (auto it = obj.find("urls"); it != obj.end() && it->is_array()) {
    for (const auto& u : *it)
      if (u.is_string()) t.urls.push_back(u.get<std::string>());
  }
  return t;
}

}  // namespace

std::vector<Tweet> ingest_tweets(const std::string& path, IngestStats* stats,
                                 bool require_urls) {
  std::string content = read_file(path);
  std::vector<Tweet> tweets;
  IngestStats local;
  std::unordered_set<std::string> seen;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++local.total_lines;
    Tweet t;
    try {
      json obj = json::parse(line);
      if (!obj.is_object()) throw json::type_error::create(302, "object", &obj);
      t = parse_tweet_json(obj);
    } catch (const json::exception&) {
      ++local.malformed;
      continue;
    }
    if (t.id.empty() || trim(t.text).empty()) {
      ++local.filtered;
      continue;
    }
    if (t.in_reply_to && *t.in_reply_to == t.id) {
      ++local.filtered;
      continue;
    }
    if (require_urls && t.urls.empty()) {
      ++local.filtered;
      continue;
    }
    if (!seen.insert(t.id).second) {
      ++local.filtered;
      continue;
    }
    tweets.push_back(std::move(t));
  }
  if (local.total_lines > 0 && local.malformed * 2 > local.total_lines)
    throw FormatError(path + ": more than half of the lines are malformed");
  if (stats) *stats = local;
  return tweets;
}

std::vector<FactCheckArticle> load_articles_jsonl(const std::string& path) {
  std::string content = read_file(path);
  std::vector<FactCheckArticle> articles;
  std::unordered_set<std::string> seen;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    FactCheckArticle a;
    try {
      json obj = json::parse(line);
      a.url = canonical_url(obj.at("url").get<std::string>());
      a.title = obj.value("title", "");
      a.subtitle = obj.value("subtitle", "");
      a.claim = obj.value("claim", "");
      a.date = opt_string(obj, "date");
      a.author = opt_string(obj, "author");
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (a.url.empty())
      throw FormatError(path + ":" + std::to_string(lineno) + ": empty url");
    if (seen.insert(a.url).second) articles.push_back(std::move(a));
  }
  return articles;
}

std::vector<ConversationTriple> resolve_triples(
    std::span<const Tweet> tweets, const std::set<std::string>& article_urls) {
  std::unordered_map<std::string, const Tweet*> by_id;
  for (const auto& t : tweets) by_id.emplace(t.id, &t);

  std::vector<ConversationTriple> triples;
  for (const auto& t : tweets) {
    for (const auto& raw : t.urls) {
      std::string url = canonical_url(raw);
      if (!article_urls.contains(url)) continue;
      ConversationTriple tr;
      tr.fc_tweet = t;
      tr.article_url = url;
      if (t.in_reply_to) {
        if (auto it = by_id.find(*t.in_reply_to); it != by_id.end())
          tr.reply = *it->second;
      }
      if (t.conversation_root) {
        if (auto it = by_id.find(*t.conversation_root); it != by_id.end())
          tr.root = *it->second;
      }
      // a reply directly under the root is context, not a distinct reply
      if (tr.reply && tr.root && tr.reply->id == tr.root->id) tr.reply.reset();
      triples.push_back(std::move(tr));
    }
  }
  return triples;
}

namespace {

std::string strip_tags(const std::string& html) {
  std::string out;
  out.reserve(html.size());
  bool in_tag = false;
  for (char ch : html) {
    if (ch == '<') {
      in_tag = true;
    } else if (ch == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(ch);
    }
  }
  return out;
}

std::string decode_entities(std::string s) {
  static const std::pair<const char*, const char*> kEntities[] = {
      {"&amp;", "&"}, {"&lt;", "<"},    {"&gt;", ">"},
      {"&quot;", "\""}, {"&#39;", "'"}, {"&apos;", "'"},
      {"&nbsp;", " "}, {"&rsquo;", "'"}, {"&lsquo;", "'"},
      {"&rdquo;", "\""}, {"&ldquo;", "\""}, {"&mdash;", "-"},
      {"&ndash;", "-"},
  };
  for (const auto& [from, to] : kEntities) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, std::strlen(from), to);
      pos += std::strlen(to);
    }
  }
  return s;
}

std::string collapse_ws(const std::string& s) {
  std::string out;
  bool prev_space = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!prev_space) out.push_back(' ');
      prev_space = true;
    } else {
      out.push_back(c);
      prev_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string clean_fragment(const std::string& raw) {
  return collapse_ws(decode_entities(strip_tags(raw)));
}

// First capture group of the first match, cleaned; empty when no match.
std::string search_first(const std::string& html, const std::regex& re) {
  std::smatch m;
  if (std::regex_search(html, m, re) && m.size() > 1)
    return clean_fragment(m[1].str());
  return "";
}

}  // namespace

FactCheckArticle parse_article_html(const std::string& html,
                                    const std::string& url) {
  static const std::regex kMetaTitle(
      R"re(<meta[^>]*property="og:title"[^>]*content="([^"]*)")re",
      std::regex::icase);
  static const std::regex kH1(R"re(<h1[^>]*>([\s\S]*?)</h1>)re",
                              std::regex::icase);
  static const std::regex kTitleTag(R"re(<title[^>]*>([\s\S]*?)</title>)re",
                                    std::regex::icase);
  static const std::regex kMetaDesc(
      R"re(<meta[^>]*name="description"[^>]*content="([^"]*)")re",
      std::regex::icase);
  static const std::regex kSubtitleClass(
      R"re(<[a-z0-9]+[^>]*class="[^"]*(?:subtitle|dek|standfirst)[^"]*"[^>]*>([\s\S]*?)</[a-z0-9]+>)re",
      std::regex::icase);
  static const std::regex kClaimClass(
      R"re(<[a-z0-9]+[^>]*class="[^"]*claim[^"]*"[^>]*>([\s\S]*?)</[a-z0-9]+>)re",
      std::regex::icase);
  static const std::regex kClaimLabel(
      R"re(Claim:\s*</[a-z0-9]+>\s*(?:<[^>]*>\s*)*([^<]+))re",
      std::regex::icase);
  static const std::regex kMetaDate(
      R"re(<meta[^>]*property="article:published_time"[^>]*content="([^"]*)")re",
      std::regex::icase);
  static const std::regex kTimeTag(
      R"re(<time[^>]*datetime="([^"]*)")re", std::regex::icase);
  static const std::regex kMetaAuthor(
      R"re(<meta[^>]*name="author"[^>]*content="([^"]*)")re",
      std::regex::icase);
  static const std::regex kAuthorClass(
      R"re(<[a-z0-9]+[^>]*class="[^"]*author[^"]*"[^>]*>([\s\S]*?)</[a-z0-9]+>)re",
      std::regex::icase);

  FactCheckArticle a;
  a.url = canonical_url(url);

  a.title = search_first(html, kMetaTitle);
  if (a.title.empty()) a.title = search_first(html, kH1);
  if (a.title.empty()) a.title = search_first(html, kTitleTag);
  if (a.title.empty())
    throw ParseError(a.url + ": no title found in article page");

  a.subtitle = search_first(html, kSubtitleClass);
  if (a.subtitle.empty()) a.subtitle = search_first(html, kMetaDesc);

  a.claim = search_first(html, kClaimClass);
  if (a.claim.empty()) a.claim = search_first(html, kClaimLabel);

  if (auto d = search_first(html, kMetaDate); !d.empty())
    a.date = d;
  else if (auto t = search_first(html, kTimeTag); !t.empty())
    a.date = t;

  if (auto au = search_first(html, kMetaAuthor); !au.empty())
    a.author = au;
  else if (auto ac = search_first(html, kAuthorClass); !ac.empty())
    a.author = ac;

  return a;
}

CorpusStats corpus_stats(std::span<const Tweet> tweets,
                         const NormConfig& cfg) {
  CorpusStats st;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> vocab;
  std::vector<std::size_t> lengths;
  for (const auto& t : tweets) {
    if (!seen.insert(t.id).second) continue;
    TokenList toks = normalize(t.text, cfg);
    lengths.push_back(toks.size());
    for (auto& tok : toks) vocab.insert(std::move(tok));
  }
  st.unique_tweets = lengths.size();
  st.vocab_size = vocab.size();
  if (lengths.empty()) return st;
  std::size_t total = 0;
  for (auto n : lengths) {
    total += n;
    st.max_words = std::max(st.max_words, n);
  }
  st.mean_words = static_cast<double>(total) / lengths.size();
  std::sort(lengths.begin(), lengths.end());
  std::size_t mid = lengths.size() / 2;
  if (lengths.size() % 2 == 1) {
    st.median_words = static_cast<double>(lengths[mid]);
  } else {
    st.median_words = (static_cast<double>(lengths[mid - 1]) +
                       static_cast<double>(lengths[mid])) /
                      2.0;
  }
  return st;
}

Qrels load_qrels(const std::string& path) {
  std::string content = read_file(path);
  Qrels q;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t{trim(line)};
    if (t.empty() || t[0] == '#') continue;
    auto cols = split_tabs(t);
    if (cols.size() != 4)
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected 4 tab-separated columns");
    int rel = 0;
    try {
      rel = std::stoi(std::string(cols[3]));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": bad relevance value");
    }
    std::string qid{cols[0]};
    std::string aid{cols[2]};
    if (!q.by_query.contains(qid)) q.query_order.push_back(qid);
    q.by_query[qid][aid] = rel;
  }
  return q;
}

std::string format_qrels(const Qrels& qrels) {
  std::ostringstream out;
  for (const auto& qid : qrels.query_order) {
    const auto& docs = qrels.by_query.at(qid);
    std::vector<std::string> aids;
    aids.reserve(docs.size());
    for (const auto& [aid, rel] : docs) aids.push_back(aid);
    std::sort(aids.begin(), aids.end());
    for (const auto& aid : aids)
      out << qid << "\t0\t" << aid << '\t' << docs.at(aid) << '\n';
  }
  return out.str();
}

}  // namespace claimmatch
