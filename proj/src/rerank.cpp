#include "claimmatch/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "claimmatch/errors.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

using json = nlohmann::json;

std::vector<std::string> layout_scorers(const std::string& layout) {
  if (layout == kEnsembleLayout)
    return {"tfidf:c",   "tfidf:ct",   "tfidf:cts",
            "encoder:c", "encoder:ct", "encoder:cts"};
  if (layout == kSingleLayout) return {"tfidf:cts", "encoder:cts"};
  throw FormatError("unknown feature layout: " + layout);
}

std::vector<std::string> feature_names(const std::string& layout) {
  std::vector<std::string> names;
  for (const auto& scorer : layout_scorers(layout)) {
    names.push_back("rr:" + scorer);
    names.push_back("score:" + scorer);
  }
  return names;
}

QueryFeatures build_features(const std::string& query_id,
                             const RankedList& primary,
                             std::span<const ScorerRanking> scorers,
                             const std::string& layout,
                             std::size_t max_candidates) {
  auto required = layout_scorers(layout);
  std::vector<const ScorerRanking*> ordered;
  for (const auto& name : required) {
    const ScorerRanking* found = nullptr;
    for (const auto& scorer : scorers)
      if (scorer.name == name) {
        found = &scorer;
        break;
      }
    if (!found)
      throw MissingScorerError("query " + query_id + ": scorer " + name +
                               " not provided");
    ordered.push_back(found);
  }

  QueryFeatures qf;
  qf.query_id = query_id;
  for (std::size_t i = 0; i < primary.items.size() && i < max_candidates; ++i)
    qf.candidates.push_back(primary.items[i].doc_id);

  std::vector<std::unordered_map<std::string, std::pair<std::size_t, double>>>
      lookup(ordered.size());
  for (std::size_t s = 0; s < ordered.size(); ++s)
    for (std::size_t r = 0; r < ordered[s]->ranking.items.size(); ++r) {
      const auto& item = ordered[s]->ranking.items[r];
      lookup[s].emplace(item.doc_id, std::make_pair(r + 1, item.score));
    }

  qf.features = Matrix(qf.candidates.size(), 2 * ordered.size());
  for (std::size_t i = 0; i < qf.candidates.size(); ++i) {
    for (std::size_t s = 0; s < ordered.size(); ++s) {
      auto it = lookup[s].find(qf.candidates[i]);
      if (it == lookup[s].end())
        throw MissingScorerError("query " + query_id + ": scorer " +
                                 required[s] + " does not rank candidate " +
                                 qf.candidates[i]);
      qf.features.at(i, 2 * s) =
          1.0 / static_cast<double>(it->second.first);
      qf.features.at(i, 2 * s + 1) = it->second.second;
    }
  }
  return qf;
}

double RegressionTree::predict(std::span<const double> features) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& cur = nodes[static_cast<std::size_t>(node)];
    node = features[static_cast<std::size_t>(cur.feature)] <= cur.threshold
               ? cur.left
               : cur.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double GbdtModel::predict(std::span<const double> features) const {
  double score = 0.0;
  for (const auto& tree : trees)
    score += cfg.learning_rate * tree.predict(features);
  return score;
}

double ap_at_k(std::span<const int> rels, std::size_t k) {
  std::size_t total_relevant = 0;
  for (int r : rels)
    if (r > 0) ++total_relevant;
  std::size_t denom = std::min(total_relevant, k);
  if (denom == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  std::size_t depth = std::min(k, rels.size());
  for (std::size_t pos = 0; pos < depth; ++pos) {
    if (rels[pos] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return sum / static_cast<double>(denom);
}

double swap_delta_ap_at_k(std::span<const int> rels, std::size_t i,
                          std::size_t j, std::size_t k) {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  const int ri = rels[i] > 0 ? 1 : 0;
  const int rj = rels[j] > 0 ? 1 : 0;
  if (ri == rj || i >= k) return 0.0;

  std::size_t total_relevant = 0;
  for (int r : rels)
    if (r > 0) ++total_relevant;
  std::size_t denom = std::min(total_relevant, k);
  if (denom == 0) return 0.0;

  double delta = 0.0;
  std::size_t old_prefix = 0, new_prefix = 0;
  const std::size_t end = std::min(j, k - 1);
  for (std::size_t pos = 0; pos <= end; ++pos) {
    const int old_rel = rels[pos] > 0 ? 1 : 0;
    const int new_rel = pos == i ? rj : (pos == j ? ri : old_rel);
    old_prefix += static_cast<std::size_t>(old_rel);
    new_prefix += static_cast<std::size_t>(new_rel);
    if (old_rel)
      delta -= static_cast<double>(old_prefix) / static_cast<double>(pos + 1);
    if (new_rel)
      delta += static_cast<double>(new_prefix) / static_cast<double>(pos + 1);
  }
  return delta / static_cast<double>(denom);
}

double swap_delta_ndcg_at_k(std::span<const int> rels, std::size_t i,
                            std::size_t j, std::size_t k) {
  if (i == j || rels[i] == rels[j]) return 0.0;
  auto disc = [k](std::size_t pos) {
    return pos < k ? 1.0 / std::log2(static_cast<double>(pos) + 2.0) : 0.0;
  };
  auto gain = [](int rel) { return std::pow(2.0, rel) - 1.0; };
  std::vector<int> sorted(rels.begin(), rels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  double idcg = 0.0;
  for (std::size_t pos = 0; pos < sorted.size() && pos < k; ++pos)
    idcg += gain(sorted[pos]) * disc(pos);
  if (idcg <= 0.0) return 0.0;
  return (gain(rels[i]) - gain(rels[j])) * (disc(j) - disc(i)) / idcg;
}

void lambda_gradients(std::span<const int> rels,
                      std::span<const double> scores, const GbdtConfig& cfg,
                      std::span<double> lambdas, std::span<double> weights) {
  const std::size_t n = rels.size();
  if (scores.size() != n || lambdas.size() != n || weights.size() != n)
    throw FormatError("lambda_gradients: size mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::vector<int> ranked(n);
  for (std::size_t pos = 0; pos < n; ++pos) ranked[pos] = rels[order[pos]];

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (ranked[p] == ranked[q]) continue;
      double delta = cfg.use_ndcg
                         ? swap_delta_ndcg_at_k(ranked, p, q, cfg.metric_k)
                         : swap_delta_ap_at_k(ranked, p, q, cfg.metric_k);
      delta = std::abs(delta);
      if (delta == 0.0) continue;
      const std::size_t hi = ranked[p] > ranked[q] ? p : q;
      const std::size_t lo = ranked[p] > ranked[q] ? q : p;
      const std::size_t doc_hi = order[hi];
      const std::size_t doc_lo = order[lo];
      const double rho =
          1.0 / (1.0 + std::exp(scores[doc_hi] - scores[doc_lo]));
      lambdas[doc_hi] += rho * delta;
      lambdas[doc_lo] -= rho * delta;
      const double w = rho * (1.0 - rho) * delta;
      weights[doc_hi] += w;
      weights[doc_lo] += w;
    }
  }
}

namespace {

constexpr double kMaxLeafValue = 100.0;

struct TreeBuilder {
  const Matrix& x;
  std::span<const double> lambdas;
  std::span<const double> weights;
  const GbdtConfig& cfg;
  std::vector<TreeNode> nodes;

  double leaf_value(const std::vector<std::size_t>& samples) const {
    double sum_l = 0.0, sum_w = 0.0;
    for (auto s : samples) {
      sum_l += lambdas[s];
      sum_w += weights[s];
    }
    if (sum_w <= 0.0) return 0.0;
    return std::clamp(sum_l / sum_w, -kMaxLeafValue, kMaxLeafValue);
  }

  int build(std::vector<std::size_t> samples, std::size_t depth) {
    const std::size_t n = samples.size();
    int id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    double total = 0.0;
    for (auto s : samples) total += lambdas[s];

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = samples;
    if (depth < cfg.max_depth && n >= 2 * cfg.min_samples_leaf) {
      for (std::size_t f = 0; f < x.cols; ++f) {
        std::sort(sorted.begin(), sorted.end(),
                  [this, f](std::size_t a, std::size_t b) {
                    double va = x.at(a, f), vb = x.at(b, f);
                    if (va != vb) return va < vb;
                    return a < b;
                  });
        double left_sum = 0.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
          left_sum += lambdas[sorted[pos]];
          const std::size_t n_left = pos + 1;
          const std::size_t n_right = n - n_left;
          if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf)
            continue;
          const double v_here = x.at(sorted[pos], f);
          const double v_next = x.at(sorted[pos + 1], f);
          if (v_here == v_next) continue;
          const double right_sum = total - left_sum;
          const double gain =
              left_sum * left_sum / static_cast<double>(n_left) +
              right_sum * right_sum / static_cast<double>(n_right) -
              total * total / static_cast<double>(n);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = v_here;
          }
        }
      }
    }

    if (best_feature < 0) {
      nodes[static_cast<std::size_t>(id)].value = leaf_value(samples);
      return id;
    }

    std::vector<std::size_t> left, right;
    for (auto s : samples) {
      if (x.at(s, static_cast<std::size_t>(best_feature)) <= best_threshold)
        left.push_back(s);
      else
        right.push_back(s);
    }
    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    nodes[static_cast<std::size_t>(id)].gain = best_gain;
    int l = build(std::move(left), depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    int r = build(std::move(right), depth + 1);
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

GbdtModel train_lambdamart(std::span<const QueryFeatures> queries,
                           const Qrels& qrels, const GbdtConfig& cfg,
                           const std::string& layout) {
  if (queries.empty()) throw DegenerateDataError("lambdamart: no queries");
  const std::size_t n_features = queries.front().features.cols;

  std::size_t total_rows = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::vector<int>> rels(queries.size());
  bool any_mixed = false;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& qf = queries[q];
    if (qf.features.cols != n_features)
      throw LayoutMismatchError("lambdamart: inconsistent feature widths");
    if (!qrels.has_query(qf.query_id))
      throw UnknownQueryError("lambdamart: query " + qf.query_id +
                              " not in qrels");
    offsets.push_back(total_rows);
    total_rows += qf.candidates.size();
    rels[q].resize(qf.candidates.size());
    bool has_rel = false, has_nonrel = false;
    for (std::size_t i = 0; i < qf.candidates.size(); ++i) {
      rels[q][i] = qrels.relevance(qf.query_id, qf.candidates[i]);
      (rels[q][i] > 0 ? has_rel : has_nonrel) = true;
    }
    if (has_rel && has_nonrel) any_mixed = true;
  }
  if (!any_mixed)
    throw DegenerateDataError(
        "lambdamart: no query has both relevant and non-relevant candidates");

  Matrix x(total_rows, n_features);
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t i = 0; i < queries[q].candidates.size(); ++i)
      for (std::size_t f = 0; f < n_features; ++f)
        x.at(offsets[q] + i, f) = queries[q].features.at(i, f);

  std::vector<double> scores(total_rows, 0.0);
  std::vector<double> lambdas(total_rows), weights(total_rows);

  auto train_map = [&]() {
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const std::size_t n = queries[q].candidates.size();
      bool has_rel = false;
      for (int r : rels[q])
        if (r > 0) has_rel = true;
      if (!has_rel) continue;
      ++counted;
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return scores[offsets[q] + a] > scores[offsets[q] + b];
                       });
      std::vector<int> ranked(n);
      for (std::size_t pos = 0; pos < n; ++pos)
        ranked[pos] = rels[q][order[pos]];
      total += ap_at_k(ranked, cfg.metric_k);
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
  };

  GbdtModel model;
  model.cfg = cfg;
  model.layout = layout;
  model.n_features = n_features;

  double best_map = train_map();
  std::size_t best_iter = 0;
  for (std::size_t iter = 1; iter <= cfg.trees; ++iter) {
    std::fill(lambdas.begin(), lambdas.end(), 0.0);
    std::fill(weights.begin(), weights.end(), 0.0);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const std::size_t n = queries[q].candidates.size();
      lambda_gradients(
          rels[q], std::span<const double>(scores).subspan(offsets[q], n), cfg,
          std::span<double>(lambdas).subspan(offsets[q], n),
          std::span<double>(weights).subspan(offsets[q], n));
    }

    TreeBuilder builder{x, lambdas, weights, cfg, {}};
    std::vector<std::size_t> all(total_rows);
    std::iota(all.begin(), all.end(), 0);
    builder.build(std::move(all), 0);
    RegressionTree tree{std::move(builder.nodes)};

    for (std::size_t row = 0; row < total_rows; ++row)
      scores[row] += cfg.learning_rate * tree.predict(x.row(row));
    model.trees.push_back(std::move(tree));

    double map = train_map();
    if (map > best_map) {
      best_map = map;
      best_iter = iter;
    }
  }
  model.trees.resize(best_iter);
  return model;
}

RankedList rerank(const GbdtModel& model, const QueryFeatures& features) {
  if (features.features.cols != model.n_features)
    throw LayoutMismatchError(
        "rerank: model expects " + std::to_string(model.n_features) +
        " features, got " + std::to_string(features.features.cols));
  const std::size_t n = features.candidates.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = model.predict(features.features.row(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  RankedList out;
  out.query_id = features.query_id;
  for (auto i : order) out.items.push_back({features.candidates[i], scores[i]});
  return out;
}

std::vector<double> feature_importance(const GbdtModel& model) {
  std::vector<double> gains(model.n_features, 0.0);
  double total = 0.0;
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes)
      if (node.feature >= 0) {
        gains[static_cast<std::size_t>(node.feature)] += node.gain;
        total += node.gain;
      }
  if (total > 0.0)
    for (auto& g : gains) g /= total;
  return gains;
}

namespace {

constexpr int kGbdtVersion = 1;

}  // namespace

std::string gbdt_to_json(const GbdtModel& model) {
  json doc;
  doc["version"] = kGbdtVersion;
  doc["layout"] = model.layout;
  doc["n_features"] = model.n_features;
  doc["config"] = {{"trees", model.cfg.trees},
                   {"max_depth", model.cfg.max_depth},
                   {"learning_rate", model.cfg.learning_rate},
                   {"min_samples_leaf", model.cfg.min_samples_leaf},
                   {"metric_k", model.cfg.metric_k},
                   {"use_ndcg", model.cfg.use_ndcg}};
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes)
      nodes.push_back({{"f", node.feature},
                       {"t", node.threshold},
                       {"l", node.left},
                       {"r", node.right},
                       {"v", node.value},
                       {"g", node.gain}});
    trees.push_back({{"nodes", nodes}});
  }
  doc["trees"] = trees;
  return doc.dump();
}

GbdtModel gbdt_from_json(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (doc.at("version").get<int>() != kGbdtVersion)
      throw FormatError("gbdt model: unsupported version");
    GbdtModel model;
    model.layout = doc.at("layout").get<std::string>();
    model.n_features = doc.at("n_features").get<std::size_t>();
    const auto& cfg = doc.at("config");
    model.cfg.trees = cfg.at("trees").get<std::size_t>();
    model.cfg.max_depth = cfg.at("max_depth").get<std::size_t>();
    model.cfg.learning_rate = cfg.at("learning_rate").get<double>();
    model.cfg.min_samples_leaf = cfg.at("min_samples_leaf").get<std::size_t>();
    model.cfg.metric_k = cfg.at("metric_k").get<std::size_t>();
    model.cfg.use_ndcg = cfg.at("use_ndcg").get<bool>();
    for (const auto& tree_doc : doc.at("trees")) {
      RegressionTree tree;
      for (const auto& node_doc : tree_doc.at("nodes")) {
        TreeNode node;
        node.feature = node_doc.at("f").get<int>();
        node.threshold = node_doc.at("t").get<double>();
        node.left = node_doc.at("l").get<int>();
        node.right = node_doc.at("r").get<int>();
        node.value = node_doc.at("v").get<double>();
        node.gain = node_doc.at("g").get<double>();
        tree.nodes.push_back(node);
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("gbdt model: ") + e.what());
  }
}

void save_gbdt(const GbdtModel& model, const std::string& path) {
  atomic_write_file(path, gbdt_to_json(model));
}

GbdtModel load_gbdt(const std::string& path) {
  return gbdt_from_json(read_file(path));
}

std::string format_features(std::span<const QueryFeatures> queries,
                            const std::string& layout,
                            const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  for (const auto& h : header_lines) out << "# " << h << '\n';
  out << "# layout=" << layout << '\n';
  for (const auto& qf : queries)
    for (std::size_t i = 0; i < qf.candidates.size(); ++i) {
      out << qf.query_id << '\t' << qf.candidates[i];
      for (std::size_t f = 0; f < qf.features.cols; ++f)
        out << '\t' << format_double(qf.features.at(i, f));
      out << '\n';
    }
  return out.str();
}

std::pair<std::vector<QueryFeatures>, std::string> parse_features(
    const std::string& text, const std::string& origin) {
  std::string layout;
  std::vector<std::string> qids;
  std::unordered_map<std::string, std::size_t> qpos;
  std::vector<std::vector<std::pair<std::string, std::vector<double>>>> rows;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t n_features = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t{trim(line)};
    if (t.empty()) continue;
    if (t[0] == '#') {
      auto body = trim(std::string_view(t).substr(1));
      if (body.starts_with("layout="))
        layout = std::string(body.substr(7));
      continue;
    }
    auto cols = split_tabs(t);
    if (cols.size() < 3)
      throw FormatError(origin + ":" + std::to_string(lineno) +
                        ": expected query, article and features");
    if (n_features == 0)
      n_features = cols.size() - 2;
    else if (cols.size() - 2 != n_features)
      throw FormatError(origin + ":" + std::to_string(lineno) +
                        ": inconsistent feature count");
    std::vector<double> feats(n_features);
    for (std::size_t f = 0; f < n_features; ++f) {
      try {
        feats[f] = std::stod(std::string(cols[f + 2]));
      } catch (const std::exception&) {
        throw FormatError(origin + ":" + std::to_string(lineno) +
                          ": bad feature value");
      }
    }
    std::string qid{cols[0]};
    auto it = qpos.find(qid);
    if (it == qpos.end()) {
      it = qpos.emplace(qid, qids.size()).first;
      qids.push_back(qid);
      rows.emplace_back();
    }
    rows[it->second].emplace_back(std::string(cols[1]), std::move(feats));
  }
  if (layout.empty())
    throw FormatError(origin + ": missing layout header");

  std::vector<QueryFeatures> queries;
  for (std::size_t q = 0; q < qids.size(); ++q) {
    QueryFeatures qf;
    qf.query_id = qids[q];
    qf.features = Matrix(rows[q].size(), n_features);
    for (std::size_t i = 0; i < rows[q].size(); ++i) {
      qf.candidates.push_back(rows[q][i].first);
      for (std::size_t f = 0; f < n_features; ++f)
        qf.features.at(i, f) = rows[q][i].second[f];
    }
    queries.push_back(std::move(qf));
  }
  return {std::move(queries), layout};
}

std::pair<std::vector<QueryFeatures>, std::string> load_features(
    const std::string& path) {
  return parse_features(read_file(path), path);
}

}  // namespace claimmatch
