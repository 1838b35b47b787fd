#include "claimmatch/ranking.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "claimmatch/errors.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

std::vector<RankedList> load_predictions(const std::string& path,
                                         std::string* tag_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions file: " + path);
  // query order follows first appearance; ranks sort within each query
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<long, ScoredDoc>>> per_query;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = split_tabs(t);
    if (cols.size() != 5) {
      throw FormatError("predictions line " + std::to_string(lineno) +
                        ": expected 5 tab-separated columns");
    }
    long rank = 0;
    double score = 0.0;
    try {
      rank = std::stol(cols[2]);
      score = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw FormatError("predictions line " + std::to_string(lineno) +
                        ": bad rank or score");
    }
    if (tag_out && tag_out->empty()) *tag_out = cols[4];
    if (!per_query.contains(cols[0])) order.push_back(cols[0]);
    per_query[cols[0]].push_back({rank, {cols[1], score}});
  }
  std::vector<RankedList> out;
  out.reserve(order.size());
  for (const auto& qid : order) {
    auto& rows = per_query[qid];
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    RankedList rl;
    rl.query_id = qid;
    for (auto& [rank, doc] : rows) rl.items.push_back(std::move(doc));
    out.push_back(std::move(rl));
  }
  return out;
}

std::string format_predictions(const std::vector<RankedList>& runs,
                               const std::string& tag,
                               const std::vector<std::string>& header_lines) {
  std::ostringstream os;
  for (const auto& h : header_lines) os << "# " << h << "\n";
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.items.size(); ++i) {
      os << run.query_id << '\t' << run.items[i].doc_id << '\t' << (i + 1)
         << '\t' << format_double(run.items[i].score) << '\t' << tag << "\n";
    }
  }
  return os.str();
}

}  // namespace claimmatch
