#include <doctest.h>

#include <nlohmann/json.hpp>

#include "claimmatch/errors.hpp"
#include "claimmatch/evalmetrics.hpp"
#include "claimmatch/rng.hpp"

using namespace claimmatch;

namespace {

RankedList run_of(const std::string& qid,
                  const std::vector<std::string>& docs) {
  RankedList run;
  run.query_id = qid;
  double score = static_cast<double>(docs.size());
  for (const auto& d : docs) run.items.push_back({d, score--});
  return run;
}

Qrels qrels_of(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& q) {
  Qrels out;
  for (const auto& [qid, docs] : q) {
    out.query_order.push_back(qid);
    auto& m = out.by_query[qid];
    for (const auto& d : docs) m[d] = 1;
  }
  return out;
}

}  // namespace

TEST_CASE("average_precision_at follows the truncated formula") {
  std::unordered_map<std::string, int> rels{{"d1", 1}, {"d2", 1}};
  auto run = run_of("q", {"d1", "dx", "d2"});
  CHECK(average_precision_at(run, rels, 1) == doctest::Approx(1.0));
  // relevant at ranks 1 and 3: (1/1 + 2/3) / min(2, 3)
  CHECK(average_precision_at(run, rels, 3) ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(average_precision_at(run, rels, 5) ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));

  std::unordered_map<std::string, int> one{{"d1", 1}};
  auto late = run_of("q", {"dx", "d1", "dy"});
  CHECK(average_precision_at(late, one, 1) == 0.0);
  CHECK(average_precision_at(late, one, 3) == doctest::Approx(0.5));

  auto miss = run_of("q", {"dx", "dy"});
  CHECK(average_precision_at(miss, one, 5) == 0.0);
}

TEST_CASE("evaluate averages hand-computed per-query scores") {
  auto qrels = qrels_of({{"qa", {"d1", "d2"}}, {"qb", {"d1"}}});
  std::vector<RankedList> runs = {run_of("qa", {"d1", "dx", "d2"}),
                                  run_of("qb", {"dx", "d1", "dy"})};
  auto m = evaluate(runs, qrels);
  CHECK(m.evaluated_queries == 2);
  CHECK(m.zero_relevant_queries == 0);
  CHECK(m.mrr == doctest::Approx((1.0 + 0.5) / 2.0).epsilon(1e-15));
  CHECK(m.map_at.at(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.map_at.at(3) ==
        doctest::Approx((5.0 / 6.0 + 0.5) / 2.0).epsilon(1e-15));
  CHECK(m.p_at.at(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.p_at.at(3) ==
        doctest::Approx((2.0 / 3.0 + 1.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(m.p_at.at(20) ==
        doctest::Approx((2.0 / 20.0 + 1.0 / 20.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("zero-relevant queries are excluded but counted") {
  auto qrels = qrels_of({{"qa", {"d1"}}});
  qrels.query_order.push_back("qz");
  qrels.by_query["qz"]["dz"] = 0;
  std::vector<RankedList> runs = {run_of("qa", {"d1"}),
                                  run_of("qz", {"dz"})};
  auto m = evaluate(runs, qrels);
  CHECK(m.evaluated_queries == 1);
  CHECK(m.zero_relevant_queries == 1);
  CHECK(m.mrr == doctest::Approx(1.0));
}

TEST_CASE("queries missing from the runs score zero") {
  auto qrels = qrels_of({{"qa", {"d1"}}, {"qm", {"d1"}}});
  std::vector<RankedList> runs = {run_of("qa", {"d1"})};
  auto m = evaluate(runs, qrels);
  CHECK(m.evaluated_queries == 2);
  CHECK(m.mrr == doctest::Approx(0.5));
  CHECK(m.map_at.at(5) == doctest::Approx(0.5));
}

TEST_CASE("evaluate validates runs") {
  auto qrels = qrels_of({{"qa", {"d1"}}});
  std::vector<RankedList> unknown = {run_of("qx", {"d1"})};
  CHECK_THROWS_AS(evaluate(unknown, qrels), UnknownQueryError);

  std::vector<RankedList> dup = {run_of("qa", {"d1", "d1"})};
  CHECK_THROWS_AS(evaluate(dup, qrels), FormatError);

  RankedList rising;
  rising.query_id = "qa";
  rising.items = {{"d1", 0.1}, {"d2", 0.9}};
  std::vector<RankedList> bad = {rising};
  CHECK_THROWS_AS(evaluate(bad, qrels), FormatError);
}

TEST_CASE("MAP@1 equals P@1 on random runs") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    Qrels qrels;
    std::vector<RankedList> runs;
    for (int q = 0; q < 8; ++q) {
      std::string qid = "q" + std::to_string(q);
      qrels.query_order.push_back(qid);
      auto& rels = qrels.by_query[qid];
      std::size_t n_rel = 1 + rng.index(3);
      for (std::size_t r = 0; r < n_rel; ++r)
        rels["d" + std::to_string(r)] = 1;
      std::vector<std::string> pool;
      for (int d = 0; d < 6; ++d) pool.push_back("d" + std::to_string(d));
      rng.shuffle(pool);
      pool.resize(1 + rng.index(5));
      runs.push_back(run_of(qid, pool));
    }
    auto m = evaluate(runs, qrels);
    CHECK(m.map_at.at(1) == doctest::Approx(m.p_at.at(1)).epsilon(1e-15));
  }
}

TEST_CASE("metrics_to_json carries every cutoff") {
  auto qrels = qrels_of({{"qa", {"d1"}}});
  std::vector<RankedList> runs = {run_of("qa", {"d1"})};
  auto m = evaluate(runs, qrels);
  auto text = metrics_to_json(m, {"tool=test"});
  auto j = nlohmann::json::parse(text);
  CHECK(j.at("mrr").get<double>() == doctest::Approx(1.0));
  for (auto k : kCutoffs) {
    auto key = std::to_string(k);
    CHECK(j.at("map").at(key).get<double>() == doctest::Approx(1.0));
    // values serialize with 10 significant digits
    CHECK(j.at("p").at(key).get<double>() ==
          doctest::Approx(1.0 / static_cast<double>(k)).epsilon(1e-9));
  }
  CHECK(j.at("evaluated_queries").get<int>() == 1);
  CHECK(j.at("zero_relevant_queries").get<int>() == 0);

  auto table = metrics_table({{"system-a", m}, {"system-b", m}});
  CHECK(table.find("system-a") != std::string::npos);
  CHECK(table.find("MAP@5") != std::string::npos);
}

TEST_CASE("fleiss_kappa matches exact rational cases") {
  // two raters, three items, one disagreement: kappa = 1/3
  std::vector<std::vector<int>> third{{0, 0}, {1, 1}, {0, 1}};
  CHECK(fleiss_kappa(third) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // three raters, two items: P_bar = 2/3, P_e = 5/9, kappa = 1/4
  std::vector<std::vector<int>> quarter{{0, 0, 0}, {0, 1, 1}};
  CHECK(fleiss_kappa(quarter) == doctest::Approx(0.25).epsilon(1e-12));

  // unanimity over two categories
  std::vector<std::vector<int>> perfect{{0, 0}, {1, 1}, {0, 0}, {1, 1}};
  CHECK(fleiss_kappa(perfect) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fleiss_kappa rejects degenerate input") {
  std::vector<std::vector<int>> single_cat{{0, 0}, {0, 0}};
  CHECK_THROWS_AS(fleiss_kappa(single_cat), DegenerateDataError);
  std::vector<std::vector<int>> empty;
  CHECK_THROWS_AS(fleiss_kappa(empty), DegenerateDataError);
  std::vector<std::vector<int>> one_rater{{0}, {1}};
  CHECK_THROWS_AS(fleiss_kappa(one_rater), DegenerateDataError);
  std::vector<std::vector<int>> ragged{{0, 1}, {0}};
  CHECK_THROWS_AS(fleiss_kappa(ragged), FormatError);
}

TEST_CASE("cohen_kappa matches exact rational cases") {
  std::vector<int> a{0, 0, 1, 1, 1};
  std::vector<int> b{0, 1, 1, 1, 0};
  // po = 3/5, pe = 13/25: kappa = 1/6
  CHECK(cohen_kappa(a, b) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  std::vector<int> same{0, 1, 0, 1};
  CHECK(cohen_kappa(same, same) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<int> x{0, 1};
  std::vector<int> y{1, 0};
  CHECK(cohen_kappa(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cohen_kappa rejects degenerate input") {
  std::vector<int> a{1, 1};
  CHECK_THROWS_AS(cohen_kappa(a, a), DegenerateDataError);
  std::vector<int> empty;
  CHECK_THROWS_AS(cohen_kappa(empty, empty), DegenerateDataError);
  std::vector<int> b{0};
  CHECK_THROWS_AS(cohen_kappa(a, b), FormatError);
}
