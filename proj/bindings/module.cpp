#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "claimmatch/cli.hpp"
#include "claimmatch/corpus.hpp"
#include "claimmatch/distsup.hpp"
#include "claimmatch/encoder.hpp"
#include "claimmatch/evalmetrics.hpp"
#include "claimmatch/porter.hpp"
#include "claimmatch/ranking.hpp"
#include "claimmatch/textnorm.hpp"

namespace py = pybind11;

namespace {

claimmatch::NormConfig make_norm(
    const std::optional<std::vector<std::string>>& stopwords,
    bool strip_handles, bool stem) {
  claimmatch::NormConfig cfg;
  const auto& words =
      stopwords ? *stopwords : claimmatch::default_stopwords();
  cfg.stopwords.insert(words.begin(), words.end());
  cfg.strip_handles = strip_handles;
  cfg.stem = stem;
  return cfg;
}

py::dict metrics_dict(const claimmatch::Metrics& m) {
  py::dict out;
  out["mrr"] = m.mrr;
  py::dict map_at, p_at;
  for (const auto& [k, v] : m.map_at) map_at[py::int_(k)] = v;
  for (const auto& [k, v] : m.p_at) p_at[py::int_(k)] = v;
  out["map_at"] = map_at;
  out["p_at"] = p_at;
  out["evaluated_queries"] = m.evaluated_queries;
  out["zero_relevant_queries"] = m.zero_relevant_queries;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "previously fact-checked claim detection core";

  m.def(
      "normalize",
      [](const std::string& text,
         const std::optional<std::vector<std::string>>& stopwords,
         bool strip_handles, bool stem) {
        return claimmatch::normalize(text,
                                     make_norm(stopwords, strip_handles, stem));
      },
      py::arg("text"), py::arg("stopwords") = py::none(),
      py::arg("strip_handles") = true, py::arg("stem") = true);

  m.def("porter_stem",
        [](const std::string& w) { return claimmatch::porter_stem(w); },
        py::arg("word"));

  m.def("jaccard", &claimmatch::jaccard, py::arg("a"), py::arg("b"));

  m.def("default_stopwords",
        []() { return claimmatch::default_stopwords(); });

  m.def("fleiss_kappa", &claimmatch::fleiss_kappa, py::arg("annotations"));

  m.def(
      "cohen_kappa",
      [](const std::vector<int>& a, const std::vector<int>& b) {
        return claimmatch::cohen_kappa(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "estimate_matches",
      [](const std::string& bins_path, std::size_t total) {
        auto result = claimmatch::estimate_matches(
            claimmatch::load_bins(bins_path), total);
        return py::make_tuple(result.fraction, result.count);
      },
      py::arg("bins_path"), py::arg("total"));

  m.def(
      "evaluate_files",
      [](const std::string& predictions_path, const std::string& qrels_path) {
        auto runs = claimmatch::load_predictions(predictions_path);
        auto qrels = claimmatch::load_qrels(qrels_path);
        return metrics_dict(claimmatch::evaluate(runs, qrels));
      },
      py::arg("predictions_path"), py::arg("qrels_path"));

  m.def(
      "encode_tweet",
      [](const std::string& model_path, const std::string& text) {
        auto model = claimmatch::load_encoder(model_path);
        claimmatch::NormConfig norm = make_norm(std::nullopt, true, true);
        auto input = claimmatch::make_tweet_input(
            model.vocab, claimmatch::normalize(text, norm));
        return claimmatch::encode(model, input);
      },
      py::arg("model_path"), py::arg("text"));

  m.def("run_cli", &claimmatch::run_cli, py::arg("args"),
        "Invoke a pipeline subcommand in process; returns the exit code.");
}
