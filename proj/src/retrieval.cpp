#include "claimmatch/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "claimmatch/errors.hpp"

namespace claimmatch {

FieldCombo field_combo_from_string(const std::string& s) {
  if (s == "c") return FieldCombo::kClaim;
  if (s == "ct") return FieldCombo::kClaimTitle;
  if (s == "cts") return FieldCombo::kClaimTitleSubtitle;
  throw FormatError("unknown field combination: " + s +
                    " (expected c, ct, or cts)");
}

std::string field_combo_to_string(FieldCombo combo) {
  switch (combo) {
    case FieldCombo::kClaim: return "c";
    case FieldCombo::kClaimTitle: return "ct";
    case FieldCombo::kClaimTitleSubtitle: return "cts";
  }
  return "ct";
}

std::string combine_fields(const FactCheckArticle& article, FieldCombo combo) {
  std::string out = article.claim;
  auto append = [&out](const std::string& part) {
    if (part.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += part;
  };
  if (combo == FieldCombo::kClaimTitle ||
      combo == FieldCombo::kClaimTitleSubtitle)
    append(article.title);
  if (combo == FieldCombo::kClaimTitleSubtitle) append(article.subtitle);
  return out;
}

InvertedIndex build_index(std::span<const FactCheckArticle> articles,
                          FieldCombo combo, const NormConfig& cfg) {
  InvertedIndex index;
  index.combo = combo;
  std::size_t total_len = 0;
  for (const auto& article : articles) {
    std::size_t doc = index.doc_ids.size();
    index.doc_ids.push_back(article.url);
    TokenList toks = normalize(combine_fields(article, combo), cfg);
    index.doc_lengths.push_back(toks.size());
    total_len += toks.size();
    std::map<std::string, std::size_t> tf;
    for (const auto& t : toks) ++tf[t];
    for (const auto& [tok, count] : tf)
      index.postings[tok].push_back({doc, count});
  }
  index.avgdl = index.doc_ids.empty()
                    ? 0.0
                    : static_cast<double>(total_len) / index.doc_ids.size();
  return index;
}

RankedList bm25_rank(const InvertedIndex& index, const TokenList& query,
                     std::size_t k, const Bm25Params& params) {
  if (index.size() == 0) throw EmptyIndexError("bm25: empty index");
  const double n = static_cast<double>(index.size());
  std::vector<double> scores(index.size(), 0.0);
  for (const auto& tok : query) {
    auto it = index.postings.find(tok);
    if (it == index.postings.end()) continue;
    const auto& plist = it->second;
    double df = static_cast<double>(plist.size());
    double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    for (const auto& p : plist) {
      double tf = static_cast<double>(p.tf);
      double dl = static_cast<double>(index.doc_lengths[p.doc]);
      double denom =
          tf + params.k1 * (1.0 - params.b + params.b * dl / index.avgdl);
      scores[p.doc] += idf * tf * (params.k1 + 1.0) / denom;
    }
  }
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  RankedList result;
  for (std::size_t i = 0; i < order.size() && i < k; ++i)
    result.items.push_back({index.doc_ids[order[i]], scores[order[i]]});
  return result;
}

TfIdfModel build_tfidf(std::span<const FactCheckArticle> articles,
                       FieldCombo combo, const NormConfig& cfg) {
  TfIdfModel model;
  model.combo = combo;
  std::vector<std::map<std::string, std::size_t>> tfs;
  std::map<std::string, std::size_t> df;
  for (const auto& article : articles) {
    model.doc_index.emplace(article.url, model.doc_ids.size());
    model.doc_ids.push_back(article.url);
    TokenList toks = normalize(combine_fields(article, combo), cfg);
    std::map<std::string, std::size_t> tf;
    for (const auto& t : toks) ++tf[t];
    for (const auto& [tok, count] : tf) ++df[tok];
    tfs.push_back(std::move(tf));
  }
  const double n = static_cast<double>(model.doc_ids.size());
  for (const auto& [tok, count] : df)
    model.idf[tok] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
  for (const auto& tf : tfs) {
    std::unordered_map<std::string, double> vec;
    double norm_sq = 0.0;
    for (const auto& [tok, count] : tf) {
      double w = static_cast<double>(count) * model.idf.at(tok);
      vec.emplace(tok, w);
      norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [tok, w] : vec) w *= inv;
    }
    model.doc_vectors.push_back(std::move(vec));
  }
  return model;
}

namespace {

std::unordered_map<std::string, double> query_vector(const TfIdfModel& model,
                                                     const TokenList& query) {
  std::unordered_map<std::string, std::size_t> tf;
  for (const auto& t : query) ++tf[t];
  std::unordered_map<std::string, double> vec;
  double norm_sq = 0.0;
  for (const auto& [tok, count] : tf) {
    auto it = model.idf.find(tok);
    if (it == model.idf.end()) continue;
    double w = static_cast<double>(count) * it->second;
    vec.emplace(tok, w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [tok, w] : vec) w *= inv;
  }
  return vec;
}

double sparse_cosine(const std::unordered_map<std::string, double>& q,
                     const std::unordered_map<std::string, double>& d) {
  double sum = 0.0;
  for (const auto& [tok, w] : q) {
    auto it = d.find(tok);
    if (it != d.end()) sum += w * it->second;
  }
  return sum;
}

}  // namespace

double tfidf_score(const TfIdfModel& model, const TokenList& query,
                   const std::string& article_id) {
  auto it = model.doc_index.find(article_id);
  if (it == model.doc_index.end())
    throw UnknownDocError("tfidf: unknown article " + article_id);
  auto q = query_vector(model, query);
  return sparse_cosine(q, model.doc_vectors[it->second]);
}

RankedList tfidf_rank(const TfIdfModel& model, const TokenList& query,
                      std::size_t k) {
  if (model.doc_ids.empty()) throw EmptyIndexError("tfidf: empty model");
  auto q = query_vector(model, query);
  std::vector<double> scores(model.doc_ids.size());
  for (std::size_t i = 0; i < model.doc_vectors.size(); ++i)
    scores[i] = sparse_cosine(q, model.doc_vectors[i]);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  RankedList result;
  for (std::size_t i = 0; i < order.size() && i < k; ++i)
    result.items.push_back({model.doc_ids[order[i]], scores[order[i]]});
  return result;
}

}  // namespace claimmatch
