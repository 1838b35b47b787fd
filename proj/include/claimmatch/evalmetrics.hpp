#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/ranking.hpp"

namespace claimmatch {

inline constexpr std::array<std::size_t, 5> kCutoffs = {1, 3, 5, 10, 20};

struct Metrics {
  double mrr = 0.0;
  std::map<std::size_t, double> map_at;  // keyed by cutoff
  std::map<std::size_t, double> p_at;
  std::size_t evaluated_queries = 0;
  std::size_t zero_relevant_queries = 0;  // excluded from the means
};

// Average precision truncated at k with denominator min(R, k), R = number of
// relevant docs for the query.
double average_precision_at(const RankedList& run,
                            const std::unordered_map<std::string, int>& rels,
                            std::size_t k);

// MRR plus MAP@K and P@K for K in {1,3,5,10,20}. Queries present in qrels but
// missing from the runs score 0; queries with no relevant document are
// excluded from the means and counted separately. A run query absent from
// qrels raises UnknownQuery.
Metrics evaluate(std::span<const RankedList> runs, const Qrels& qrels);

std::string metrics_to_json(const Metrics& m,
                            const std::vector<std::string>& header_lines = {});
// Aligned table with one row per system tag.
std::string metrics_table(
    const std::vector<std::pair<std::string, Metrics>>& rows);

// items x raters category assignments. Throws DegenerateData when chance
// agreement is 1 (single category used throughout).
double fleiss_kappa(const std::vector<std::vector<int>>& annotations);

double cohen_kappa(std::span<const int> a, std::span<const int> b);

}  // namespace claimmatch
