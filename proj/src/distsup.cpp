#include "claimmatch/distsup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "claimmatch/errors.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

double jaccard_score(const Tweet& tweet, const FactCheckArticle& article,
                     const NormConfig& cfg) {
  TokenList tweet_toks = normalize(tweet.text, cfg);
  TokenList title_toks = normalize(article.title, cfg);
  TokenList subtitle_toks = normalize(article.subtitle, cfg);
  double title_sim = jaccard(tweet_toks, title_toks);
  double subtitle_sim = jaccard(tweet_toks, subtitle_toks);
  return (title_sim + subtitle_sim) / 2.0;
}

double cosine_score(const Tweet& tweet, const FactCheckArticle& article,
                    const EncoderModel& model, const NormConfig& cfg) {
  auto tweet_vec =
      encode(model, make_tweet_input(model.vocab, normalize(tweet.text, cfg)));
  auto article_vec = encode(model, make_article_input(model, article, cfg));
  return dot(tweet_vec, article_vec);
}

TripleTarget triple_target_from_string(const std::string& s) {
  if (s == "root") return TripleTarget::kRoot;
  if (s == "reply") return TripleTarget::kReply;
  if (s == "best") return TripleTarget::kBest;
  throw FormatError("unknown triple target: " + s +
                    " (expected root, reply, or best)");
}

std::string triple_target_to_string(TripleTarget target) {
  switch (target) {
    case TripleTarget::kRoot: return "root";
    case TripleTarget::kReply: return "reply";
    case TripleTarget::kBest: return "best";
  }
  return "best";
}

std::vector<LabeledPair> score_triples(
    std::span<const ConversationTriple> triples,
    const std::unordered_map<std::string, FactCheckArticle>& articles,
    TripleTarget target, const std::string& strategy, const ScoreFn& score) {
  std::vector<LabeledPair> pairs;
  for (const auto& triple : triples) {
    auto ait = articles.find(triple.article_url);
    if (ait == articles.end()) continue;
    const FactCheckArticle& article = ait->second;

    const Tweet* chosen = nullptr;
    double best = 0.0;
    auto consider = [&](const std::optional<Tweet>& side) {
      if (!side) return;
      double s = score(*side, article);
      if (!chosen || s > best) {
        chosen = &*side;
        best = s;
      }
    };
    switch (target) {
      case TripleTarget::kRoot:
        consider(triple.root);
        break;
      case TripleTarget::kReply:
        consider(triple.reply);
        break;
      case TripleTarget::kBest:
        consider(triple.root);
        consider(triple.reply);
        break;
    }
    if (!chosen) continue;
    pairs.push_back({chosen->id, triple.article_url, best, strategy});
  }
  return pairs;
}

std::vector<LabeledPair> build_split(std::span<const LabeledPair> pairs,
                                     const std::string& strategy,
                                     double threshold) {
  std::map<std::pair<std::string, std::string>, LabeledPair> best;
  for (const auto& pair : pairs) {
    if (pair.strategy != strategy) continue;
    if (!(pair.score > threshold)) continue;
    auto key = std::make_pair(pair.tweet_id, pair.article_url);
    auto it = best.find(key);
    if (it == best.end() || pair.score > it->second.score) best[key] = pair;
  }
  if (best.empty())
    throw EmptySplitError("build_split: no pair above threshold " +
                          format_double(threshold));
  std::vector<LabeledPair> out;
  out.reserve(best.size());
  for (auto& [key, pair] : best) out.push_back(std::move(pair));
  return out;
}

std::vector<double> jaccard_bin_edges() {
  std::vector<double> edges(11);
  for (int i = 0; i <= 10; ++i) edges[i] = i / 10.0;
  return edges;
}

std::vector<double> cosine_bin_edges() {
  std::vector<double> edges{-0.4};
  for (int i = 1; i <= 10; ++i) edges.push_back(i / 10.0);
  return edges;
}

BinTable bin_statistics(std::span<const double> scores,
                        std::span<const std::optional<bool>> annotations,
                        std::span<const double> edges) {
  if (edges.size() < 2) throw FormatError("bin_statistics: need >= 2 edges");
  if (!annotations.empty() && annotations.size() != scores.size())
    throw FormatError("bin_statistics: annotation size mismatch");
  const std::size_t bins = edges.size() - 1;
  BinTable table;
  table.edges.assign(edges.begin(), edges.end());
  table.example_pct.assign(bins, 0.0);
  table.correct_pct.assign(bins, 0.0);
  table.counts.assign(bins, 0);
  table.annotated.assign(bins, 0);
  std::vector<std::size_t> correct(bins, 0);

  auto bin_of = [&edges, bins](double score) -> std::optional<std::size_t> {
    if (score < edges[0]) return std::nullopt;
    // final bin is closed on top
    if (score >= edges[bins]) return score == edges[bins]
                                         ? std::optional<std::size_t>(bins - 1)
                                         : std::nullopt;
    std::size_t lo = 0, hi = bins;
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (score >= edges[mid])
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  };

  std::size_t total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto b = bin_of(scores[i]);
    if (!b) continue;
    ++total;
    ++table.counts[*b];
    if (!annotations.empty() && annotations[i].has_value()) {
      ++table.annotated[*b];
      if (*annotations[i]) ++correct[*b];
    }
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (total > 0)
      table.example_pct[b] = 100.0 * static_cast<double>(table.counts[b]) /
                             static_cast<double>(total);
    if (table.annotated[b] > 0)
      table.correct_pct[b] = 100.0 * static_cast<double>(correct[b]) /
                             static_cast<double>(table.annotated[b]);
  }
  return table;
}

EstimateResult estimate_matches(const BinTable& bins,
                                std::size_t total_pairs) {
  EstimateResult res;
  for (std::size_t b = 0; b < bins.bins(); ++b)
    res.fraction += (bins.example_pct[b] / 100.0) * (bins.correct_pct[b] / 100.0);
  res.count = std::llround(res.fraction * static_cast<double>(total_pairs));
  return res;
}

std::vector<LabeledPair> load_split(const std::string& path) {
  std::string content = read_file(path);
  std::vector<LabeledPair> pairs;
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
    LabeledPair p;
    p.tweet_id = std::string(cols[0]);
    p.article_url = std::string(cols[1]);
    try {
      p.score = std::stod(std::string(cols[2]));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad score");
    }
    p.strategy = std::string(cols[3]);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string format_split(std::span<const LabeledPair> pairs,
                         const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  for (const auto& h : header_lines) out << "# " << h << '\n';
  for (const auto& p : pairs)
    out << p.tweet_id << '\t' << p.article_url << '\t'
        << format_double(p.score) << '\t' << p.strategy << '\n';
  return out.str();
}

BinTable load_bins(const std::string& path) {
  std::string content = read_file(path);
  BinTable table;
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
                        ": expected lo/hi/examples_pct/correct_pct");
    try {
      double lo = std::stod(std::string(cols[0]));
      double hi = std::stod(std::string(cols[1]));
      if (table.edges.empty())
        table.edges.push_back(lo);
      else if (std::abs(table.edges.back() - lo) > 1e-9)
        throw FormatError(path + ":" + std::to_string(lineno) +
                          ": bins are not contiguous");
      table.edges.push_back(hi);
      table.example_pct.push_back(std::stod(std::string(cols[2])));
      table.correct_pct.push_back(std::stod(std::string(cols[3])));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": bad numeric value");
    }
  }
  if (table.example_pct.empty()) throw FormatError(path + ": no bins");
  double sum = 0.0;
  for (double pct : table.example_pct) sum += pct;
  // columns rounded to two decimals can drift up to 0.005 per bin
  if (std::abs(sum - 100.0) > 0.1)
    throw FormatError(path + ": example percentages sum to " +
                      format_double(sum) + ", expected 100");
  table.counts.assign(table.bins(), 0);
  table.annotated.assign(table.bins(), 0);
  return table;
}

std::string format_bins(const BinTable& bins,
                        const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  for (const auto& h : header_lines) out << "# " << h << '\n';
  out << "# lo\thi\texamples_pct\tcorrect_pct\n";
  for (std::size_t b = 0; b < bins.bins(); ++b)
    out << format_double(bins.edges[b]) << '\t'
        << format_double(bins.edges[b + 1]) << '\t'
        << format_double(bins.example_pct[b]) << '\t'
        << format_double(bins.correct_pct[b]) << '\n';
  return out.str();
}

}  // namespace claimmatch
