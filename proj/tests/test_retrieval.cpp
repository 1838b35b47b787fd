#include <doctest.h>

#include <cmath>

#include "claimmatch/errors.hpp"
#include "claimmatch/retrieval.hpp"

using namespace claimmatch;

namespace {

FactCheckArticle art(const std::string& url, const std::string& claim,
                     const std::string& title = "",
                     const std::string& subtitle = "") {
  FactCheckArticle a;
  a.url = url;
  a.claim = claim;
  a.title = title;
  a.subtitle = subtitle;
  return a;
}

// claims chosen so normalization is the identity on the tokens
std::vector<FactCheckArticle> abc_corpus() {
  return {art("u1", "alpha beta"), art("u2", "alpha alpha beta"),
          art("u3", "gamma")};
}

}  // namespace

TEST_CASE("combine_fields joins claim, title, subtitle in order") {
  auto a = art("u", "the claim", "the title", "the subtitle");
  CHECK(combine_fields(a, FieldCombo::kClaim) == "the claim");
  CHECK(combine_fields(a, FieldCombo::kClaimTitle) == "the claim the title");
  CHECK(combine_fields(a, FieldCombo::kClaimTitleSubtitle) ==
        "the claim the title the subtitle");

  SUBCASE("empty fields do not leave double spaces") {
    auto no_title = art("u", "claim only", "", "sub");
    CHECK(combine_fields(no_title, FieldCombo::kClaimTitleSubtitle) ==
          "claim only sub");
  }
}

TEST_CASE("field combo string round trip") {
  for (auto c : {FieldCombo::kClaim, FieldCombo::kClaimTitle,
                 FieldCombo::kClaimTitleSubtitle})
    CHECK(field_combo_from_string(field_combo_to_string(c)) == c);
  CHECK(field_combo_to_string(FieldCombo::kClaim) == "c");
  CHECK(field_combo_to_string(FieldCombo::kClaimTitle) == "ct");
  CHECK(field_combo_to_string(FieldCombo::kClaimTitleSubtitle) == "cts");
  CHECK_THROWS_AS(field_combo_from_string("tc"), FormatError);
}

TEST_CASE("build_index computes lengths and postings") {
  NormConfig cfg;
  auto index = build_index(abc_corpus(), FieldCombo::kClaim, cfg);
  REQUIRE(index.size() == 3);
  CHECK(index.doc_ids == std::vector<std::string>{"u1", "u2", "u3"});
  CHECK(index.doc_lengths == std::vector<std::size_t>{2, 3, 1});
  CHECK(index.avgdl == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(index.postings.count("alpha") == 1);
  const auto& alpha = index.postings.at("alpha");
  REQUIRE(alpha.size() == 2);
  CHECK(alpha[0].doc == 0);
  CHECK(alpha[0].tf == 1);
  CHECK(alpha[1].doc == 1);
  CHECK(alpha[1].tf == 2);
}

TEST_CASE("bm25 scores match the formula by hand") {
  NormConfig cfg;
  auto index = build_index(abc_corpus(), FieldCombo::kClaim, cfg);
  auto run = bm25_rank(index, {"alpha"}, 10);
  // N=3, df(alpha)=2: idf = ln((3-2+0.5)/(2+0.5) + 1) = ln(1.6)
  // u1: tf=1, |d|=2=avgdl -> 1*2.2 / (1 + 1.2*1) = 1
  // u2: tf=2, |d|=3 -> 2*2.2 / (2 + 1.2*(0.25 + 0.75*1.5)) = 4.4/3.65
  const double idf = std::log(1.6);
  REQUIRE(run.items.size() == 3);
  CHECK(run.items[0].doc_id == "u2");
  CHECK(run.items[0].score == doctest::Approx(idf * 4.4 / 3.65).epsilon(1e-9));
  CHECK(run.items[1].doc_id == "u1");
  CHECK(run.items[1].score == doctest::Approx(idf).epsilon(1e-9));
  CHECK(run.items[2].doc_id == "u3");  // zero score, kept in the ranking
  CHECK(run.items[2].score == 0.0);

  SUBCASE("k truncates the list") {
    CHECK(bm25_rank(index, {"alpha"}, 1).items.size() == 1);
  }
  SUBCASE("unseen query tokens leave the tie-break order") {
    auto r = bm25_rank(index, {"zeta"}, 10);
    REQUIRE(r.items.size() == 3);
    CHECK(r.items[0].doc_id == "u1");
    for (const auto& item : r.items) CHECK(item.score == 0.0);
  }
  SUBCASE("parameter changes move the scores") {
    Bm25Params flat{1.2, 0.0};  // no length normalization
    auto r = bm25_rank(index, {"alpha"}, 10, flat);
    CHECK(r.items[0].score ==
          doctest::Approx(idf * 2 * 2.2 / (2 + 1.2)).epsilon(1e-9));
  }
}

TEST_CASE("bm25 breaks ties by ascending doc index") {
  NormConfig cfg;
  std::vector<FactCheckArticle> twins = {art("second", "alpha beta"),
                                         art("first", "alpha beta"),
                                         art("other", "gamma")};
  auto index = build_index(twins, FieldCombo::kClaim, cfg);
  auto run = bm25_rank(index, {"alpha"}, 10);
  REQUIRE(run.items.size() == 3);
  CHECK(run.items[0].doc_id == "second");  // listed first, same score
  CHECK(run.items[1].doc_id == "first");
  CHECK(run.items[0].score == run.items[1].score);
  CHECK(run.items[2].doc_id == "other");
}

TEST_CASE("bm25 rejects an empty index") {
  NormConfig cfg;
  std::vector<FactCheckArticle> none;
  auto index = build_index(none, FieldCombo::kClaim, cfg);
  CHECK_THROWS_AS(bm25_rank(index, {"alpha"}, 5), EmptyIndexError);
}

TEST_CASE("tfidf cosine matches hand-normalized vectors") {
  NormConfig cfg;
  auto model = build_tfidf(abc_corpus(), FieldCombo::kClaim, cfg);
  // idf(alpha) = idf(beta) = ln(4/3)+1, idf(gamma) = ln(2)+1
  const double i_ab = std::log(4.0 / 3.0) + 1.0;
  const double i_g = std::log(2.0) + 1.0;
  CHECK(model.idf.at("alpha") == doctest::Approx(i_ab).epsilon(1e-12));
  CHECK(model.idf.at("gamma") == doctest::Approx(i_g).epsilon(1e-12));

  // u1 (1,1): cos with pure-alpha query = 1/sqrt(2)
  // u2 (2,1): 2/sqrt(5); both independent of idf since idfs are equal
  CHECK(tfidf_score(model, {"alpha"}, "u1") ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(tfidf_score(model, {"alpha"}, "u2") ==
        doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-9));
  CHECK(tfidf_score(model, {"gamma"}, "u3") ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tfidf_score(model, {"alpha"}, "u3") == 0.0);

  SUBCASE("mixed query weights by idf") {
    double qa = i_ab, qg = i_g;
    double qn = std::sqrt(qa * qa + qg * qg);
    double expected = (qa / qn) * (1.0 / std::sqrt(2.0));
    CHECK(tfidf_score(model, {"alpha", "gamma"}, "u1") ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(tfidf_score(model, {"alpha", "gamma"}, "u3") ==
          doctest::Approx(qg / qn).epsilon(1e-9));
  }
  SUBCASE("unknown doc id throws") {
    CHECK_THROWS_AS(tfidf_score(model, {"alpha"}, "nope"), UnknownDocError);
  }
  SUBCASE("out-of-vocabulary query scores zero everywhere") {
    CHECK(tfidf_score(model, {"zeta"}, "u1") == 0.0);
  }
}

TEST_CASE("tfidf_rank orders by cosine with positional tie break") {
  NormConfig cfg;
  auto model = build_tfidf(abc_corpus(), FieldCombo::kClaim, cfg);
  auto run = tfidf_rank(model, {"alpha"}, 10);
  REQUIRE(run.items.size() >= 2);
  CHECK(run.items[0].doc_id == "u2");
  CHECK(run.items[1].doc_id == "u1");

  std::vector<FactCheckArticle> twins = {art("x", "alpha"), art("y", "alpha")};
  auto twin_model = build_tfidf(twins, FieldCombo::kClaim, cfg);
  auto tie = tfidf_rank(twin_model, {"alpha"}, 2);
  CHECK(tie.items[0].doc_id == "x");
  CHECK(tie.items[1].doc_id == "y");

  std::vector<FactCheckArticle> none;
  auto empty = build_tfidf(none, FieldCombo::kClaim, cfg);
  CHECK_THROWS_AS(tfidf_rank(empty, {"alpha"}, 5), EmptyIndexError);
}

TEST_CASE("field combination changes what is indexed") {
  NormConfig cfg;
  std::vector<FactCheckArticle> arts = {
      art("u", "claimword", "titleword", "subtitleword")};
  auto c = build_index(arts, FieldCombo::kClaim, cfg);
  auto ct = build_index(arts, FieldCombo::kClaimTitle, cfg);
  auto cts = build_index(arts, FieldCombo::kClaimTitleSubtitle, cfg);
  CHECK(c.postings.count("titleword") == 0);
  CHECK(ct.postings.count("titleword") == 1);
  CHECK(ct.postings.count("subtitleword") == 0);
  CHECK(cts.postings.count("subtitleword") == 1);
}
