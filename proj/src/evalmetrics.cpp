#include "claimmatch/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "claimmatch/errors.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

double average_precision_at(const RankedList& run,
                            const std::unordered_map<std::string, int>& rels,
                            std::size_t k) {
  std::size_t total_relevant = 0;
  for (const auto& [aid, rel] : rels)
    if (rel > 0) ++total_relevant;
  if (total_relevant == 0) return 0.0;

  double sum = 0.0;
  std::size_t hits = 0;
  std::size_t depth = std::min(k, run.items.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = rels.find(run.items[i].doc_id);
    if (it != rels.end() && it->second > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(total_relevant, k));
}

namespace {

double reciprocal_rank(const RankedList& run,
                       const std::unordered_map<std::string, int>& rels) {
  for (std::size_t i = 0; i < run.items.size(); ++i) {
    auto it = rels.find(run.items[i].doc_id);
    if (it != rels.end() && it->second > 0)
      return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double precision_at(const RankedList& run,
                    const std::unordered_map<std::string, int>& rels,
                    std::size_t k) {
  std::size_t hits = 0;
  std::size_t depth = std::min(k, run.items.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = rels.find(run.items[i].doc_id);
    if (it != rels.end() && it->second > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

bool has_relevant(const std::unordered_map<std::string, int>& rels) {
  for (const auto& [aid, rel] : rels)
    if (rel > 0) return true;
  return false;
}

}  // namespace

Metrics evaluate(std::span<const RankedList> runs, const Qrels& qrels) {
  std::unordered_map<std::string, const RankedList*> by_query;
  for (const auto& run : runs) {
    if (!qrels.has_query(run.query_id))
      throw UnknownQueryError("query " + run.query_id + " not in qrels");
    std::unordered_set<std::string> seen;
    for (const auto& item : run.items)
      if (!seen.insert(item.doc_id).second)
        throw FormatError("query " + run.query_id + ": duplicate candidate " +
                          item.doc_id);
    for (std::size_t i = 1; i < run.items.size(); ++i)
      if (run.items[i].score > run.items[i - 1].score)
        throw FormatError("query " + run.query_id +
                          ": scores must be non-increasing");
    by_query.emplace(run.query_id, &run);
  }

  Metrics m;
  for (auto k : kCutoffs) {
    m.map_at[k] = 0.0;
    m.p_at[k] = 0.0;
  }
  static const RankedList kEmptyRun;
  for (const auto& qid : qrels.query_order) {
    const auto& rels = qrels.by_query.at(qid);
    if (!has_relevant(rels)) {
      ++m.zero_relevant_queries;
      continue;
    }
    ++m.evaluated_queries;
    auto it = by_query.find(qid);
    const RankedList& run = it == by_query.end() ? kEmptyRun : *it->second;
    m.mrr += reciprocal_rank(run, rels);
    for (auto k : kCutoffs) {
      m.map_at[k] += average_precision_at(run, rels, k);
      m.p_at[k] += precision_at(run, rels, k);
    }
  }
  if (m.evaluated_queries > 0) {
    double n = static_cast<double>(m.evaluated_queries);
    m.mrr /= n;
    for (auto k : kCutoffs) {
      m.map_at[k] /= n;
      m.p_at[k] /= n;
    }
  }
  return m;
}

std::string metrics_to_json(const Metrics& m,
                            const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  out << "{\n";
  if (!header_lines.empty()) {
    out << "  \"meta\": {\n";
    for (std::size_t i = 0; i < header_lines.size(); ++i) {
      auto eq = header_lines[i].find('=');
      std::string key = eq == std::string::npos
                            ? header_lines[i]
                            : std::string(trim(header_lines[i].substr(0, eq)));
      std::string val = eq == std::string::npos
                            ? ""
                            : std::string(trim(header_lines[i].substr(eq + 1)));
      out << "    \"" << key << "\": \"" << val << "\""
          << (i + 1 < header_lines.size() ? "," : "") << "\n";
    }
    out << "  },\n";
  }
  out << "  \"mrr\": " << format_double(m.mrr) << ",\n";
  out << "  \"map\": {";
  bool first = true;
  for (auto k : kCutoffs) {
    out << (first ? "" : ", ") << "\"" << k
        << "\": " << format_double(m.map_at.at(k));
    first = false;
  }
  out << "},\n  \"p\": {";
  first = true;
  for (auto k : kCutoffs) {
    out << (first ? "" : ", ") << "\"" << k
        << "\": " << format_double(m.p_at.at(k));
    first = false;
  }
  out << "},\n";
  out << "  \"evaluated_queries\": " << m.evaluated_queries << ",\n";
  out << "  \"zero_relevant_queries\": " << m.zero_relevant_queries << "\n";
  out << "}\n";
  return out.str();
}

std::string metrics_table(
    const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::size_t name_width = 6;
  for (const auto& [name, metrics] : rows)
    name_width = std::max(name_width, name.size());
  std::ostringstream out;
  char buf[64];
  auto cell = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%7.4f", v);
    return std::string(buf);
  };
  out << "system" << std::string(name_width - 6, ' ')
      << "      MRR     P@1   MAP@1   MAP@3   MAP@5  MAP@10  MAP@20\n";
  for (const auto& [name, metrics] : rows) {
    out << name << std::string(name_width - name.size(), ' ') << "  "
        << cell(metrics.mrr) << " " << cell(metrics.p_at.at(1));
    for (auto k : kCutoffs) out << " " << cell(metrics.map_at.at(k));
    out << "\n";
  }
  return out.str();
}

double fleiss_kappa(const std::vector<std::vector<int>>& annotations) {
  if (annotations.empty())
    throw DegenerateDataError("fleiss_kappa: no items");
  std::size_t n_raters = annotations.front().size();
  if (n_raters < 2)
    throw DegenerateDataError("fleiss_kappa: need at least 2 raters");
  for (const auto& row : annotations)
    if (row.size() != n_raters)
      throw FormatError("fleiss_kappa: ragged annotation matrix");

  std::set<int> categories;
  for (const auto& row : annotations)
    for (int c : row) categories.insert(c);

  const double big_n = static_cast<double>(annotations.size());
  const double n = static_cast<double>(n_raters);

  std::map<int, double> p_cat;
  double p_bar = 0.0;
  for (const auto& row : annotations) {
    std::map<int, std::size_t> counts;
    for (int c : row) ++counts[c];
    double agree = 0.0;
    for (const auto& [cat, cnt] : counts) {
      double cd = static_cast<double>(cnt);
      agree += cd * (cd - 1.0);
      p_cat[cat] += cd;
    }
    p_bar += agree / (n * (n - 1.0));
  }
  p_bar /= big_n;

  double p_e = 0.0;
  for (auto& [cat, total] : p_cat) {
    double share = total / (big_n * n);
    p_e += share * share;
  }
  if (p_e >= 1.0)
    throw DegenerateDataError("fleiss_kappa: chance agreement is 1");
  return (p_bar - p_e) / (1.0 - p_e);
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw FormatError("cohen_kappa: label vectors differ in length");
  if (a.empty()) throw DegenerateDataError("cohen_kappa: no items");

  const double n = static_cast<double>(a.size());
  std::map<int, double> count_a, count_b;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    count_a[a[i]] += 1.0;
    count_b[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [cat, ca] : count_a) {
    auto it = count_b.find(cat);
    if (it != count_b.end()) p_e += (ca / n) * (it->second / n);
  }
  if (p_e >= 1.0)
    throw DegenerateDataError("cohen_kappa: chance agreement is 1");
  return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace claimmatch
