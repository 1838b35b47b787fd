#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/ranking.hpp"
#include "claimmatch/textnorm.hpp"

namespace claimmatch {

enum class FieldCombo { kClaim, kClaimTitle, kClaimTitleSubtitle };

FieldCombo field_combo_from_string(const std::string& s);
std::string field_combo_to_string(FieldCombo combo);

// Article text for one field combination, fields joined by single spaces
// in the order claim, title, subtitle.
std::string combine_fields(const FactCheckArticle& article, FieldCombo combo);

struct Posting {
  std::size_t doc = 0;  // internal index
  std::size_t tf = 0;
};

struct InvertedIndex {
  FieldCombo combo = FieldCombo::kClaimTitle;
  std::vector<std::string> doc_ids;                 // internal index -> url
  std::vector<std::size_t> doc_lengths;             // token counts
  double avgdl = 0.0;
  std::map<std::string, std::vector<Posting>> postings;  // sorted by doc

  std::size_t size() const { return doc_ids.size(); }
};

InvertedIndex build_index(std::span<const FactCheckArticle> articles,
                          FieldCombo combo, const NormConfig& cfg);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Okapi BM25: score(d) = sum_t idf(t) * tf*(k1+1) / (tf + k1*(1-b+b*|d|/avgdl))
// with idf(t) = ln((N-df+0.5)/(df+0.5) + 1). Top-k by score, ties broken by
// ascending internal doc index. Throws EmptyIndex on an empty index.
RankedList bm25_rank(const InvertedIndex& index, const TokenList& query,
                     std::size_t k, const Bm25Params& params = {});

struct TfIdfModel {
  FieldCombo combo = FieldCombo::kClaimTitle;
  std::vector<std::string> doc_ids;
  std::unordered_map<std::string, std::size_t> doc_index;
  std::unordered_map<std::string, double> idf;  // log((1+N)/(1+df)) + 1
  // per-doc unit-norm sparse tf.idf vectors, token -> weight
  std::vector<std::unordered_map<std::string, double>> doc_vectors;
};

TfIdfModel build_tfidf(std::span<const FactCheckArticle> articles,
                       FieldCombo combo, const NormConfig& cfg);

// Cosine between the unit-norm query tf.idf vector and the stored doc vector.
// Query tokens outside the vocabulary contribute nothing. Throws UnknownDoc
// for article ids missing from the model.
double tfidf_score(const TfIdfModel& model, const TokenList& query,
                   const std::string& article_id);

RankedList tfidf_rank(const TfIdfModel& model, const TokenList& query,
                      std::size_t k);

}  // namespace claimmatch
