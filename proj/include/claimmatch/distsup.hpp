#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/encoder.hpp"
#include "claimmatch/textnorm.hpp"

namespace claimmatch {

struct LabeledPair {
  std::string tweet_id;
  std::string article_url;
  double score = 0.0;
  std::string strategy;  // jaccard | cosine
};

// Mean of the tweet-vs-title and tweet-vs-subtitle Jaccard similarities. An
// empty subtitle contributes 0 to the average rather than being skipped.
double jaccard_score(const Tweet& tweet, const FactCheckArticle& article,
                     const NormConfig& cfg);

// Cosine between the encoded tweet and the encoded article.
double cosine_score(const Tweet& tweet, const FactCheckArticle& article,
                    const EncoderModel& model, const NormConfig& cfg);

enum class TripleTarget { kRoot, kReply, kBest };

TripleTarget triple_target_from_string(const std::string& s);
std::string triple_target_to_string(TripleTarget target);

using ScoreFn =
    std::function<double(const Tweet&, const FactCheckArticle&)>;

// Scores the selected conversation side of every triple against its linked
// article. kBest takes whichever of root/reply scores higher; triples whose
// selected side is absent are skipped.
std::vector<LabeledPair> score_triples(
    std::span<const ConversationTriple> triples,
    const std::unordered_map<std::string, FactCheckArticle>& articles,
    TripleTarget target, const std::string& strategy, const ScoreFn& score);

// Keeps pairs of the given strategy with score strictly above threshold,
// deduplicated on (tweet, article) with the max score retained. Throws
// EmptySplit when nothing survives.
std::vector<LabeledPair> build_split(std::span<const LabeledPair> pairs,
                                     const std::string& strategy,
                                     double threshold);

struct BinTable {
  std::vector<double> edges;        // size bins + 1
  std::vector<double> example_pct;  // per-bin share of all pairs, percent
  std::vector<double> correct_pct;  // per-bin correct rate, percent
  std::vector<std::size_t> counts;
  std::vector<std::size_t> annotated;

  std::size_t bins() const { return example_pct.size(); }
};

std::vector<double> jaccard_bin_edges();  // 0.0, 0.1, ..., 1.0
std::vector<double> cosine_bin_edges();   // -0.4, 0.1, 0.2, ..., 1.0

// Histograms scores into the given bins (final bin closed on top); where a
// correctness flag is present the per-bin correct rate is computed over the
// annotated pairs only.
BinTable bin_statistics(std::span<const double> scores,
                        std::span<const std::optional<bool>> annotations,
                        std::span<const double> edges);

struct EstimateResult {
  double fraction = 0.0;  // in [0,1]
  long long count = 0;
};

// fraction = sum over bins of example share * correct rate;
// count = round(fraction * total_pairs).
EstimateResult estimate_matches(const BinTable& bins, std::size_t total_pairs);

// split TSV: tweet_id<TAB>article_url<TAB>score<TAB>strategy with `# key=value`
// metadata headers.
std::vector<LabeledPair> load_split(const std::string& path);
std::string format_split(std::span<const LabeledPair> pairs,
                         const std::vector<std::string>& header_lines);

// bins TSV: lo<TAB>hi<TAB>examples_pct<TAB>correct_pct
BinTable load_bins(const std::string& path);
std::string format_bins(const BinTable& bins,
                        const std::vector<std::string>& header_lines);

}  // namespace claimmatch
