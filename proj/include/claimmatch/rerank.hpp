#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/matrix.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

// Feature layouts, two features (reciprocal rank, score) per scorer:
//   ensemble-v1: tfidf c/ct/cts then encoder c/ct/cts -> 12 features
//   single-v1:   tfidf cts then encoder cts           -> 4 features
inline const std::string kEnsembleLayout = "ensemble-v1";
inline const std::string kSingleLayout = "single-v1";

std::vector<std::string> feature_names(const std::string& layout);
std::vector<std::string> layout_scorers(const std::string& layout);

struct ScorerRanking {
  std::string name;
  RankedList ranking;  // full ranking of the candidate pool
};

struct QueryFeatures {
  std::string query_id;
  std::vector<std::string> candidates;  // original (primary-ranking) order
  Matrix features;                      // candidates x n_features
};

// Takes the top max_candidates of the primary ranking as the candidate list
// and assembles per-candidate features from every scorer in layout order.
// Throws MissingScorer when a scorer is absent or does not cover a candidate.
QueryFeatures build_features(const std::string& query_id,
                             const RankedList& primary,
                             std::span<const ScorerRanking> scorers,
                             const std::string& layout,
                             std::size_t max_candidates = 100);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;  // split gain, kept for feature importance
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> features) const;
};

struct GbdtConfig {
  std::size_t trees = 300;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 5;
  std::size_t metric_k = 5;  // lambda swap deltas use AP@k (or NDCG@k)
  bool use_ndcg = false;
};

struct GbdtModel {
  GbdtConfig cfg;
  std::string layout;
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> features) const;
};

// Change in AP@k (denominator min(R, k), R = relevant docs in the list) when
// the documents at 0-based positions i and j of the current ordering swap.
double swap_delta_ap_at_k(std::span<const int> rels, std::size_t i,
                          std::size_t j, std::size_t k);
double swap_delta_ndcg_at_k(std::span<const int> rels, std::size_t i,
                            std::size_t j, std::size_t k);

double ap_at_k(std::span<const int> rels, std::size_t k);

// Pairwise lambdas weighted by the absolute metric change of swapping the
// pair, accumulated into per-candidate gradients and Newton weights.
void lambda_gradients(std::span<const int> rels,
                      std::span<const double> scores, const GbdtConfig& cfg,
                      std::span<double> lambdas, std::span<double> weights);

// Boosted regression trees on lambda gradients. Relevance comes from qrels;
// every query id must be present there. Throws DegenerateData when no query
// has both a relevant and a non-relevant candidate. The returned model is
// truncated at the boosting round with the best training MAP@k.
GbdtModel train_lambdamart(std::span<const QueryFeatures> queries,
                           const Qrels& qrels, const GbdtConfig& cfg,
                           const std::string& layout = "");

// Candidates reordered by model score descending, ties keeping the original
// order. Throws LayoutMismatch when the feature layout differs.
RankedList rerank(const GbdtModel& model, const QueryFeatures& features);

// Normalized split-gain totals per feature, summing to 1.
std::vector<double> feature_importance(const GbdtModel& model);

std::string gbdt_to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const std::string& text);
void save_gbdt(const GbdtModel& model, const std::string& path);
GbdtModel load_gbdt(const std::string& path);

// features TSV: query_id<TAB>article_id<TAB>f1..fn with `# layout=...` header.
std::string format_features(std::span<const QueryFeatures> queries,
                            const std::string& layout,
                            const std::vector<std::string>& header_lines);
std::pair<std::vector<QueryFeatures>, std::string> parse_features(
    const std::string& text, const std::string& origin);
std::pair<std::vector<QueryFeatures>, std::string> load_features(
    const std::string& path);

}  // namespace claimmatch
