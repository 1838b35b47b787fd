#pragma once

#include <string>
#include <vector>

namespace claimmatch {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

// Per-query ordered candidates, scores non-increasing, no duplicate ids.
struct RankedList {
  std::string query_id;
  std::vector<ScoredDoc> items;
};

// Predictions TSV: query_id<TAB>article_id<TAB>rank<TAB>score<TAB>tag.
// '#'-prefixed header lines carry run metadata and are preserved on write.
// When tag_out is given it receives the tag of the first data row.
std::vector<RankedList> load_predictions(const std::string& path,
                                         std::string* tag_out = nullptr);
std::string format_predictions(const std::vector<RankedList>& runs,
                               const std::string& tag,
                               const std::vector<std::string>& header_lines);

}  // namespace claimmatch
