#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "claimmatch/cli.hpp"
#include "claimmatch/distsup.hpp"
#include "claimmatch/ranking.hpp"
#include "claimmatch/util.hpp"

using namespace claimmatch;
namespace fs = std::filesystem;

namespace {

const std::string kMini = std::string(CLAIMMATCH_REPO_DATA) + "/mini";
const std::string kBins = std::string(CLAIMMATCH_REPO_DATA) + "/bins";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("claimmatch_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  std::string write(const std::string& name, const std::string& body) const {
    auto p = file(name);
    std::ofstream(p) << body;
    return p;
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

}  // namespace

TEST_CASE("cli rejects bad usage with exit code 1") {
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"frobnicate"}) == 1);
  CHECK(run_cli({"estimate"}) == 1);                    // missing required
  CHECK(run_cli({"label", "--strategy", "best"}) == 1);  // bad enum value
}

TEST_CASE("cli maps data errors to exit code 2") {
  TempDir tmp;
  CHECK(run_cli({"estimate", "--bins", tmp.file("absent.tsv"), "--total",
                 "100", "--output", tmp.file("out.json")}) == 2);
  auto bad = tmp.write("bad.jsonl", "not json\nat all\n");
  CHECK(run_cli({"stats", "--tweets", bad, "--output",
                 tmp.file("stats.json")}) == 2);
}

TEST_CASE("estimate reproduces the published fractions") {
  TempDir tmp;
  auto out = tmp.file("est.json");
  REQUIRE(run_cli({"estimate", "--bins", kBins + "/cosine.tsv", "--total",
                   "332660", "--output", out}) == 0);
  auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("fraction_pct").get<double>() ==
        doctest::Approx(27.11).epsilon(0.002));
  CHECK(j.at("count").get<long long>() == 90169);
  CHECK(j.at("total").get<long long>() == 332660);
  CHECK(j.at("meta").at("tool") == "claimmatch-estimate");

  SUBCASE("reruns are byte identical") {
    auto again = tmp.file("est2.json");
    REQUIRE(run_cli({"estimate", "--bins", kBins + "/cosine.tsv", "--total",
                     "332660", "--output", again}) == 0);
    CHECK(read_file(again) == read_file(out));
  }
  SUBCASE("reply and conversation tables") {
    auto reply = tmp.file("reply.json");
    REQUIRE(run_cli({"estimate", "--bins", kBins + "/jaccard_reply.tsv",
                     "--total", "332660", "--output", reply}) == 0);
    CHECK(nlohmann::json::parse(read_file(reply))
              .at("fraction_pct")
              .get<double>() == doctest::Approx(22.23).epsilon(0.002));
    auto conv = tmp.file("conv.json");
    REQUIRE(run_cli({"estimate", "--bins", kBins + "/jaccard_conversation.tsv",
                     "--total", "332660", "--output", conv}) == 0);
    CHECK(nlohmann::json::parse(read_file(conv))
              .at("fraction_pct")
              .get<double>() == doctest::Approx(14.79).epsilon(0.002));
  }
}

TEST_CASE("normalize writes one token line per input line") {
  TempDir tmp;
  auto input = tmp.write(
      "input.txt", "Check https://t.co/abc NOW!!! @user\n1234\nthe and of\n");
  auto out = tmp.file("tokens.txt");
  REQUIRE(run_cli({"normalize", "--input", input, "--output", out}) == 0);
  std::vector<std::string> lines;
  std::vector<std::string> headers;
  std::istringstream in(read_file(out));
  for (std::string line; std::getline(in, line);)
    (line.starts_with("#") ? headers : lines).push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "check now");
  CHECK(lines[1] == "0");
  CHECK(lines[2] == "");
  REQUIRE_FALSE(headers.empty());
  CHECK(headers[0].starts_with("# tool=claimmatch-normalize"));

  SUBCASE("keep-handles and no-stem flags change the output") {
    auto handles = tmp.file("handles.txt");
    REQUIRE(run_cli({"normalize", "--input", input, "--keep-handles",
                     "--no-stem", "--output", handles}) == 0);
    CHECK(read_file(handles).find("@user") != std::string::npos);
  }
}

TEST_CASE("stats summarizes the mini corpus") {
  TempDir tmp;
  auto out = tmp.file("stats.json");
  REQUIRE(run_cli({"stats", "--tweets", kMini + "/tweets.jsonl", "--output",
                   out}) == 0);
  auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("unique_tweets").get<int>() == 142);
  CHECK(j.at("vocab_size").get<int>() > 0);
  CHECK(j.at("mean_words").get<double>() > 0.0);
}

TEST_CASE("label produces a deterministic split") {
  TempDir tmp;
  auto out = tmp.file("split.tsv");
  std::vector<std::string> args{
      "label",      "--tweets",   kMini + "/tweets.jsonl",
      "--articles", kMini + "/articles.jsonl",
      "--strategy", "jaccard",    "--threshold", "0.12",
      "--target",   "best",       "--output",    out};
  REQUIRE(run_cli(args) == 0);
  auto split = load_split(out);
  CHECK(split.size() == 35);
  for (const auto& p : split) {
    CHECK(p.score > 0.12);
    CHECK(p.strategy == "jaccard");
  }

  auto again = tmp.file("split2.tsv");
  args.back() = again;
  REQUIRE(run_cli(args) == 0);
  auto a = read_file(out), b = read_file(again);
  CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
}

TEST_CASE("kappa computes exact rational values") {
  TempDir tmp;
  auto input = tmp.write("ann.tsv", "i1\t0\t0\ni2\t1\t1\ni3\t0\t1\n");
  auto out = tmp.file("fleiss.json");
  REQUIRE(run_cli({"kappa", "--input", input, "--statistic", "fleiss",
                   "--output", out}) == 0);
  auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("kappa").get<double>() ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(j.at("items").get<int>() == 3);
  CHECK(j.at("raters").get<int>() == 2);

  auto cohen = tmp.file("cohen.json");
  REQUIRE(run_cli({"kappa", "--input", input, "--statistic", "cohen",
                   "--output", cohen}) == 0);
  CHECK(nlohmann::json::parse(read_file(cohen)).at("kappa").get<double>() ==
        doctest::Approx(0.4).epsilon(1e-9));

  SUBCASE("cohen rejects more than two raters") {
    auto three = tmp.write("three.tsv", "i1\t0\t0\t1\ni2\t1\t1\t0\n");
    CHECK(run_cli({"kappa", "--input", three, "--statistic", "cohen",
                   "--output", tmp.file("x.json")}) == 2);
  }
}

TEST_CASE("evaluate scores a predictions file against qrels") {
  TempDir tmp;
  auto qrels = tmp.write("qrels.tsv", "qa\t0\td1\t1\nqb\t0\td2\t1\n");
  auto preds = tmp.write("preds.tsv",
                         "qa\td1\t1\t0.9\tsys\n"
                         "qb\tdx\t1\t0.8\tsys\nqb\td2\t2\t0.7\tsys\n");
  auto out = tmp.file("metrics.json");
  REQUIRE(run_cli({"evaluate", "--predictions", preds, "--qrels", qrels,
                   "--output", out}) == 0);
  auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("mrr").get<double>() == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(j.at("map").at("1").get<double>() ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(j.at("evaluated_queries").get<int>() == 2);

  SUBCASE("table view goes to stdout alongside the json file") {
    auto table = tmp.file("metrics2.json");
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int rc = run_cli({"evaluate", "--predictions", preds, "--qrels", qrels,
                      "--table", "--output", table});
    std::cout.rdbuf(old);
    REQUIRE(rc == 0);
    CHECK(captured.str().find("sys") != std::string::npos);
    CHECK(captured.str().find("MAP@5") != std::string::npos);
    CHECK(nlohmann::json::parse(read_file(table)).contains("mrr"));
  }
}

TEST_CASE("retrieve ranks the mini corpus lexically") {
  TempDir tmp;
  auto out = tmp.file("preds.tsv");
  REQUIRE(run_cli({"retrieve", "--tweets", kMini + "/tweets.jsonl",
                   "--articles", kMini + "/articles.jsonl", "--qrels",
                   kMini + "/qrels_test.tsv", "--model", "bm25", "--fields",
                   "ct", "--topk", "10", "--output", out}) == 0);
  std::string tag;
  auto runs = load_predictions(out, &tag);
  CHECK(tag == "bm25-ct");
  CHECK(runs.size() == 30);
  for (const auto& run : runs) CHECK(run.items.size() <= 10);

  auto metrics = tmp.file("metrics.json");
  REQUIRE(run_cli({"evaluate", "--predictions", out, "--qrels",
                   kMini + "/qrels_test.tsv", "--output", metrics}) == 0);
  auto j = nlohmann::json::parse(read_file(metrics));
  CHECK(j.at("evaluated_queries").get<int>() == 30);
  CHECK(j.at("mrr").get<double>() >= 0.0);
  CHECK(j.at("mrr").get<double>() <= 1.0);
}

TEST_CASE("config file supplies subcommand options") {
  TempDir tmp;
  auto cfg = tmp.write("run.cfg",
                       "[estimate]\nbins=\"" + kBins +
                           "/cosine.tsv\"\ntotal=332660\n");
  auto out = tmp.file("est.json");
  REQUIRE(run_cli({"--config", cfg, "estimate", "--output", out}) == 0);
  CHECK(nlohmann::json::parse(read_file(out)).at("count").get<long long>() ==
        90169);
}

TEST_CASE("train aborts with exit code 3 on divergence") {
  TempDir tmp;
  auto split = tmp.file("split.tsv");
  REQUIRE(run_cli({"label", "--tweets", kMini + "/tweets.jsonl", "--articles",
                   kMini + "/articles.jsonl", "--strategy", "jaccard",
                   "--threshold", "0.12", "--target", "best", "--output",
                   split}) == 0);
  auto model = tmp.file("model.json");
  int rc = run_cli({"train", "--tweets", kMini + "/tweets.jsonl",
                    "--articles", kMini + "/articles.jsonl", "--split", split,
                    "--mode", "only-crowd", "--epochs", "12", "--batch-size",
                    "8", "--lr", "1.0", "--weight-decay", "1e9",
                    "--embed-dim", "8", "--hidden-dim", "8", "--output",
                    model}) ;
  CHECK(rc == 3);
}
