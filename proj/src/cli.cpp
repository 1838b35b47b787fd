#include "claimmatch/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "claimmatch/corpus.hpp"
#include "claimmatch/distsup.hpp"
#include "claimmatch/encoder.hpp"
#include "claimmatch/errors.hpp"
#include "claimmatch/evalmetrics.hpp"
#include "claimmatch/ranking.hpp"
#include "claimmatch/rerank.hpp"
#include "claimmatch/retrieval.hpp"
#include "claimmatch/textnorm.hpp"
#include "claimmatch/training.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

using json = nlohmann::json;

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> kWords = {
      "a",    "an",   "and",   "are",  "as",    "at",   "be",   "but",
      "by",   "for",  "if",    "in",   "into",  "is",   "it",   "no",
      "not",  "of",   "on",    "or",   "such",  "that", "the",  "their",
      "then", "there", "these", "they", "this",  "to",   "was",  "will",
      "with"};
  return kWords;
}

NormConfig PipelineConfig::norm_config() const {
  NormConfig cfg;
  if (stopwords_path.empty()) {
    for (const auto& w : default_stopwords()) cfg.stopwords.insert(w);
  } else {
    cfg.stopwords = load_stopwords(stopwords_path);
  }
  cfg.strip_handles = !keep_handles;
  cfg.stem = !no_stem;
  return cfg;
}

namespace {

std::vector<std::string> make_header(const std::string& tool,
                                     std::vector<std::string> kvs) {
  std::string joined = tool;
  for (const auto& kv : kvs) {
    joined += '\n';
    joined += kv;
  }
  std::vector<std::string> out;
  out.push_back("tool=claimmatch-" + tool);
  out.push_back("config_hash=" + to_hex(fnv1a64(joined)));
  for (auto& kv : kvs) out.push_back(std::move(kv));
  return out;
}

std::string header_hash(const std::vector<std::string>& header) {
  return header[1].substr(header[1].find('=') + 1);
}

void emit(const std::string& output_path, const std::string& content) {
  if (output_path.empty())
    std::cout << content;
  else
    atomic_write_file(output_path, content);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::unordered_map<std::string, const Tweet*> tweet_index(
    const std::vector<Tweet>& tweets) {
  std::unordered_map<std::string, const Tweet*> index;
  for (const auto& t : tweets) index.emplace(t.id, &t);
  return index;
}

std::unordered_map<std::string, FactCheckArticle> article_index(
    const std::vector<FactCheckArticle>& articles) {
  std::unordered_map<std::string, FactCheckArticle> index;
  for (const auto& a : articles) index.emplace(a.url, a);
  return index;
}

// Query ids come from a qrels file or a plain id-per-line file.
std::vector<std::string> resolve_query_ids(const std::string& qrels_path,
                                           const std::string& queries_path) {
  if (!qrels_path.empty()) return load_qrels(qrels_path).query_order;
  if (!queries_path.empty()) {
    std::vector<std::string> ids;
    for (const auto& raw : read_lines(queries_path)) {
      std::string t{trim(raw)};
      if (!t.empty() && t[0] != '#') ids.push_back(t);
    }
    return ids;
  }
  throw FormatError("need --qrels or --queries to define the query set");
}

const Tweet& require_tweet(
    const std::unordered_map<std::string, const Tweet*>& index,
    const std::string& id) {
  auto it = index.find(id);
  if (it == index.end())
    throw FormatError("query tweet " + id + " not found in the tweet file");
  return *it->second;
}

std::vector<double> parse_threshold_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::string t{trim(part)};
    if (t.empty()) continue;
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw FormatError("bad threshold value: " + t);
    }
  }
  if (out.empty()) throw FormatError("empty threshold list");
  return out;
}

struct LabelOptions {
  PipelineConfig base;
  std::string encoder_path;
};

std::vector<LabeledPair> score_pairs_for(const LabelOptions& opt,
                                         const NormConfig& norm) {
  auto tweets = ingest_tweets(opt.base.tweets_path);
  auto articles = load_articles_jsonl(opt.base.articles_path);
  auto by_url = article_index(articles);
  std::set<std::string> urls;
  for (const auto& a : articles) urls.insert(a.url);
  auto triples = resolve_triples(tweets, urls);
  TripleTarget target = triple_target_from_string(opt.base.target);

  if (opt.base.strategy == "jaccard") {
    return score_triples(triples, by_url, target, "jaccard",
                         [&norm](const Tweet& t, const FactCheckArticle& a) {
                           return jaccard_score(t, a, norm);
                         });
  }
  if (opt.base.strategy == "cosine") {
    if (opt.encoder_path.empty())
      throw FormatError("cosine strategy needs --encoder");
    auto model = load_encoder(opt.encoder_path);
    return score_triples(triples, by_url, target, "cosine",
                         [&](const Tweet& t, const FactCheckArticle& a) {
                           return cosine_score(t, a, model, norm);
                         });
  }
  throw FormatError("unknown strategy: " + opt.base.strategy);
}

int cmd_label(const LabelOptions& opt) {
  NormConfig norm = opt.base.norm_config();
  auto pairs = score_pairs_for(opt, norm);
  auto split = build_split(pairs, opt.base.strategy, opt.base.threshold);
  auto header = make_header(
      "label", {"strategy=" + opt.base.strategy,
                "threshold=" + format_double(opt.base.threshold),
                "target=" + opt.base.target, "norm=" + norm.fingerprint(),
                "seed=" + std::to_string(opt.base.seed)});
  emit(opt.base.output_path, format_split(split, header));
  std::cerr << "label: kept " << split.size() << " of " << pairs.size()
            << " scored pairs\n";
  return 0;
}

struct BinsOptions {
  LabelOptions label;
  std::string annotations_path;
};

int cmd_bins(const BinsOptions& opt) {
  NormConfig norm = opt.label.base.norm_config();
  auto pairs = score_pairs_for(opt.label, norm);

  std::map<std::pair<std::string, std::string>, bool> annotation_map;
  if (!opt.annotations_path.empty()) {
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(opt.annotations_path)) {
      ++lineno;
      std::string t{trim(raw)};
      if (t.empty() || t[0] == '#') continue;
      auto cols = split_tabs(t);
      if (cols.size() != 3)
        throw FormatError(opt.annotations_path + ":" + std::to_string(lineno) +
                          ": expected tweet_id/article_url/correct");
      annotation_map[{cols[0], cols[1]}] = cols[2] == "1";
    }
  }

  std::vector<double> scores;
  std::vector<std::optional<bool>> annotations;
  for (const auto& pair : pairs) {
    scores.push_back(pair.score);
    auto it = annotation_map.find({pair.tweet_id, pair.article_url});
    annotations.push_back(it == annotation_map.end()
                              ? std::optional<bool>{}
                              : std::optional<bool>{it->second});
  }
  auto edges = opt.label.base.strategy == "cosine" ? cosine_bin_edges()
                                                   : jaccard_bin_edges();
  auto table = bin_statistics(scores, annotations, edges);
  auto header = make_header(
      "bins", {"strategy=" + opt.label.base.strategy,
               "target=" + opt.label.base.target,
               "norm=" + norm.fingerprint(),
               "seed=" + std::to_string(opt.label.base.seed)});
  emit(opt.label.base.output_path, format_bins(table, header));
  return 0;
}

struct EstimateOptions {
  std::string bins_path;
  std::size_t total = 0;
  std::string output_path;
};

int cmd_estimate(const EstimateOptions& opt) {
  auto bins = load_bins(opt.bins_path);
  auto result = estimate_matches(bins, opt.total);
  auto header = make_header("estimate", {"bins=" + opt.bins_path,
                                         "total=" + std::to_string(opt.total)});
  json doc;
  doc["meta"] = {{"tool", "claimmatch-estimate"}, {"config_hash", header_hash(header)}};
  doc["fraction_pct"] = result.fraction * 100.0;
  doc["count"] = result.count;
  doc["total"] = opt.total;
  emit(opt.output_path, doc.dump(2) + "\n");
  return 0;
}

struct NormalizeOptions {
  PipelineConfig base;
  std::string input_path;
};

int cmd_normalize(const NormalizeOptions& opt) {
  NormConfig norm = opt.base.norm_config();
  std::ostringstream out;
  if (!opt.base.output_path.empty()) {
    for (const auto& h :
         make_header("normalize", {"norm=" + norm.fingerprint()}))
      out << "# " << h << '\n';
  }
  for (const auto& line : read_lines(opt.input_path)) {
    TokenList toks = normalize(line, norm);
    for (std::size_t i = 0; i < toks.size(); ++i)
      out << (i ? " " : "") << toks[i];
    out << '\n';
  }
  emit(opt.base.output_path, out.str());
  return 0;
}

int cmd_stats(const PipelineConfig& base) {
  NormConfig norm = base.norm_config();
  auto tweets = ingest_tweets(base.tweets_path);
  auto stats = corpus_stats(tweets, norm);
  auto header = make_header("stats", {"tweets=" + base.tweets_path,
                                      "norm=" + norm.fingerprint()});
  json doc;
  doc["meta"] = {{"tool", "claimmatch-stats"}, {"config_hash", header_hash(header)}};
  doc["unique_tweets"] = stats.unique_tweets;
  doc["mean_words"] = stats.mean_words;
  doc["median_words"] = stats.median_words;
  doc["max_words"] = stats.max_words;
  doc["vocab_size"] = stats.vocab_size;
  emit(base.output_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_triples(const PipelineConfig& base) {
  auto tweets = ingest_tweets(base.tweets_path);
  auto articles = load_articles_jsonl(base.articles_path);
  std::set<std::string> urls;
  for (const auto& a : articles) urls.insert(a.url);
  auto triples = resolve_triples(tweets, urls);
  std::ostringstream out;
  for (const auto& h : make_header("triples", {"tweets=" + base.tweets_path,
                                               "articles=" +
                                                   base.articles_path}))
    out << "# " << h << '\n';
  for (const auto& tr : triples) {
    json doc;
    doc["fc_tweet"] = tr.fc_tweet.id;
    doc["root"] = tr.root ? json(tr.root->id) : json(nullptr);
    doc["reply"] = tr.reply ? json(tr.reply->id) : json(nullptr);
    doc["article_url"] = tr.article_url;
    out << doc.dump() << '\n';
  }
  emit(base.output_path, out.str());
  std::cerr << "triples: resolved " << triples.size() << "\n";
  return 0;
}

struct TrainOptions {
  PipelineConfig base;
  std::string split_path;
  std::string clean_split_path;
  std::string mode = "only-crowd";
  std::string dev_qrels_path;
  std::string thresholds;  // sweep list, empty = single run
  std::string sweep_output_path;
  std::string prediction = "softmax";
  std::string fields = "cts";
  TrainConfig train;
  bool unweighted = false;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t min_count = 1;
  std::uint32_t hash_buckets = 64;
};

std::vector<TrainingPair> to_training_pairs(
    const std::vector<LabeledPair>& pairs) {
  std::vector<TrainingPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs)
    out.push_back({p.tweet_id, p.article_url, 1.0});
  return out;
}

int cmd_train(TrainOptions opt) {
  NormConfig norm = opt.base.norm_config();
  opt.train.weighted = !opt.unweighted;
  opt.train.prediction = prediction_kind_from_string(opt.prediction);
  opt.train.seed = opt.base.seed;

  auto tweets = ingest_tweets(opt.base.tweets_path);
  auto articles = load_articles_jsonl(opt.base.articles_path);
  auto by_id = tweet_index(tweets);
  auto by_url = article_index(articles);

  auto crowd_pairs = load_split(opt.split_path);
  std::vector<LabeledPair> clean_pairs;
  if (!opt.clean_split_path.empty())
    clean_pairs = load_split(opt.clean_split_path);
  if ((opt.mode == "seq" || opt.mode == "mix") && clean_pairs.empty())
    throw FormatError("mode " + opt.mode + " needs --clean-split");

  std::vector<TokenList> vocab_docs;
  for (const auto& t : tweets) vocab_docs.push_back(normalize(t.text, norm));
  for (const auto& a : articles) {
    vocab_docs.push_back(normalize(a.title, norm));
    vocab_docs.push_back(normalize(a.subtitle, norm));
    vocab_docs.push_back(normalize(a.claim, norm));
  }
  Vocab vocab = build_vocab(vocab_docs, opt.min_count, opt.hash_buckets);

  EncoderConfig enc_cfg;
  enc_cfg.embed_dim = opt.embed_dim;
  enc_cfg.hidden_dim = opt.hidden_dim;
  enc_cfg.max_seq = opt.train.max_seq;
  enc_cfg.min_count = opt.min_count;
  enc_cfg.hash_buckets = opt.hash_buckets;
  enc_cfg.seed = opt.base.seed;
  enc_cfg.article_fields = field_combo_from_string(opt.fields);
  enc_cfg.norm_fingerprint = norm.fingerprint();

  std::optional<DevSet> dev;
  if (!opt.dev_qrels_path.empty()) {
    DevSet d;
    d.qrels = load_qrels(opt.dev_qrels_path);
    for (const auto& qid : d.qrels.query_order)
      d.queries.emplace_back(qid, require_tweet(by_id, qid).text);
    d.collection = articles;
    dev = std::move(d);
  }

  auto build_data = [&](const std::vector<LabeledPair>& pairs) {
    TrainData data;
    data.pairs = to_training_pairs(pairs);
    for (const auto& p : pairs) {
      auto it = by_id.find(p.tweet_id);
      if (it == by_id.end())
        throw FormatError("split references unknown tweet " + p.tweet_id);
      data.tweet_text[p.tweet_id] = it->second->text;
      auto ait = by_url.find(p.article_url);
      if (ait == by_url.end())
        throw FormatError("split references unknown article " + p.article_url);
      data.articles.emplace(p.article_url, ait->second);
    }
    return data;
  };

  auto run_training = [&](const std::vector<LabeledPair>& crowd)
      -> TrainResult {
    EncoderModel init = init_encoder(vocab, enc_cfg);
    if (opt.mode == "only-crowd")
      return train(init, build_data(crowd), dev, opt.train, norm);
    if (opt.mode == "mix") {
      std::vector<LabeledPair> both = crowd;
      both.insert(both.end(), clean_pairs.begin(), clean_pairs.end());
      return train(init, build_data(both), dev, opt.train, norm);
    }
    if (opt.mode == "seq") {
      TrainResult first = train(init, build_data(crowd), dev, opt.train, norm);
      if (first.aborted) return first;
      TrainConfig second_cfg = opt.train;
      second_cfg.tau_init = first.tau;
      return train(first.model, build_data(clean_pairs), dev, second_cfg,
                   norm);
    }
    throw FormatError("unknown mode: " + opt.mode);
  };

  auto save_model = [&](const TrainResult& result) {
    if (opt.base.output_path.empty()) return;
    auto header = make_header(
        "train",
        {"mode=" + opt.mode, "split=" + opt.split_path,
         "config=" + opt.train.fingerprint(),
         "norm=" + norm.fingerprint(), "seed=" + std::to_string(opt.base.seed)});
    json doc = json::parse(encoder_to_json(result.model));
    doc["meta"] = {{"config_hash", header_hash(header)},
                   {"seed", opt.base.seed},
                   {"tau", result.tau},
                   {"best_dev_map5", result.best_dev_map5},
                   {"best_step", result.best_step},
                   {"steps", result.steps}};
    atomic_write_file(opt.base.output_path, doc.dump());
  };

  if (!opt.thresholds.empty()) {
    if (!dev) throw FormatError("threshold sweep needs --dev-qrels");
    auto thresholds = parse_threshold_list(opt.thresholds);
    std::ostringstream table;
    for (const auto& h : make_header(
             "train-sweep", {"mode=" + opt.mode, "split=" + opt.split_path,
                             "config=" + opt.train.fingerprint(),
                             "seed=" + std::to_string(opt.base.seed)}))
      table << "# " << h << '\n';
    table << "# threshold\tpairs\tdev_map5\n";
    double best_map = -1.0;
    std::optional<TrainResult> best_result;
    for (double t : thresholds) {
      std::map<std::pair<std::string, std::string>, LabeledPair> kept;
      for (const auto& p : crowd_pairs) {
        if (!(p.score > t)) continue;
        auto key = std::make_pair(p.tweet_id, p.article_url);
        auto it = kept.find(key);
        if (it == kept.end() || p.score > it->second.score) kept[key] = p;
      }
      if (kept.empty())
        throw EmptySplitError("sweep: no pair above threshold " +
                              format_double(t));
      std::vector<LabeledPair> filtered;
      for (auto& [key, p] : kept) filtered.push_back(p);
      TrainResult result = run_training(filtered);
      double map5 = dev_map5(result.model, *dev, norm);
      table << format_double(t) << '\t' << filtered.size() << '\t'
            << format_double(map5) << '\n';
      std::cerr << "sweep threshold " << format_double(t) << ": dev MAP@5 "
                << format_double(map5) << "\n";
      if (map5 > best_map) {
        best_map = map5;
        best_result = std::move(result);
      }
    }
    if (!opt.sweep_output_path.empty())
      atomic_write_file(opt.sweep_output_path, table.str());
    else
      std::cout << table.str();
    if (best_result) save_model(*best_result);
    return 0;
  }

  TrainResult result = run_training(crowd_pairs);
  save_model(result);
  if (result.aborted) {
    std::cerr << "train: numerical failure, wrote last good checkpoint\n";
    return 3;
  }
  std::cerr << "train: " << result.steps << " steps";
  if (dev)
    std::cerr << ", best dev MAP@5 " << format_double(result.best_dev_map5)
              << " at step " << result.best_step;
  std::cerr << "\n";
  return 0;
}

struct RetrieveOptions {
  PipelineConfig base;
  std::string model = "bm25";
  std::string fields = "ct";
  std::string queries_path;
  std::string encoder_path;
  std::size_t topk = 100;
};

int cmd_retrieve(const RetrieveOptions& opt) {
  NormConfig norm = opt.base.norm_config();
  auto tweets = ingest_tweets(opt.base.tweets_path);
  auto articles = load_articles_jsonl(opt.base.articles_path);
  auto by_id = tweet_index(tweets);
  auto qids = resolve_query_ids(opt.base.qrels_path, opt.queries_path);
  FieldCombo combo = field_combo_from_string(opt.fields);

  std::vector<RankedList> runs;
  if (opt.model == "bm25") {
    auto index = build_index(articles, combo, norm);
    for (const auto& qid : qids) {
      auto run = bm25_rank(index, normalize(require_tweet(by_id, qid).text,
                                            norm),
                           opt.topk);
      run.query_id = qid;
      runs.push_back(std::move(run));
    }
  } else if (opt.model == "tfidf") {
    auto model = build_tfidf(articles, combo, norm);
    for (const auto& qid : qids) {
      auto run = tfidf_rank(model, normalize(require_tweet(by_id, qid).text,
                                             norm),
                            opt.topk);
      run.query_id = qid;
      runs.push_back(std::move(run));
    }
  } else if (opt.model == "encoder") {
    if (opt.encoder_path.empty())
      throw FormatError("encoder retrieval needs --encoder");
    auto model = load_encoder(opt.encoder_path);
    for (const auto& qid : qids) {
      auto run = encoder_rank(model, articles, require_tweet(by_id, qid).text,
                              norm, opt.topk, combo);
      run.query_id = qid;
      runs.push_back(std::move(run));
    }
  } else {
    throw FormatError("unknown retrieval model: " + opt.model);
  }

  std::string tag = opt.model + "-" + opt.fields;
  auto header = make_header(
      "retrieve", {"model=" + opt.model, "fields=" + opt.fields,
                   "topk=" + std::to_string(opt.topk),
                   "norm=" + norm.fingerprint(),
                   "seed=" + std::to_string(opt.base.seed)});
  emit(opt.base.output_path, format_predictions(runs, tag, header));
  return 0;
}

struct FeaturesOptions {
  PipelineConfig base;
  std::string queries_path;
  std::string encoder_path;
  std::string layout = "ensemble";
  std::size_t topk = 100;
};

int cmd_features(const FeaturesOptions& opt) {
  NormConfig norm = opt.base.norm_config();
  auto tweets = ingest_tweets(opt.base.tweets_path);
  auto articles = load_articles_jsonl(opt.base.articles_path);
  auto by_id = tweet_index(tweets);
  auto qids = resolve_query_ids(opt.base.qrels_path, opt.queries_path);
  if (opt.encoder_path.empty()) throw FormatError("features needs --encoder");
  auto model = load_encoder(opt.encoder_path);

  std::string layout =
      opt.layout == "ensemble" ? kEnsembleLayout
      : opt.layout == "single" ? kSingleLayout
                               : throw FormatError("unknown layout: " +
                                                   opt.layout);
  auto scorer_names = layout_scorers(layout);

  std::vector<FieldCombo> combos;
  for (const auto& name : scorer_names)
    if (name.starts_with("tfidf:"))
      combos.push_back(field_combo_from_string(name.substr(6)));
  std::map<std::string, TfIdfModel> tfidf_models;
  for (auto combo : combos)
    tfidf_models.emplace(field_combo_to_string(combo),
                         build_tfidf(articles, combo, norm));

  // article vectors per encoder combo, computed once
  std::map<std::string, std::vector<std::vector<double>>> article_vecs;
  for (const auto& name : scorer_names) {
    if (!name.starts_with("encoder:")) continue;
    FieldCombo combo = field_combo_from_string(name.substr(8));
    std::vector<std::vector<double>> vecs;
    for (const auto& a : articles)
      vecs.push_back(encode(
          model, make_article_input(model.vocab, normalize(a.title, norm),
                                    normalize(a.subtitle, norm),
                                    normalize(a.claim, norm), combo)));
    article_vecs.emplace(name.substr(8), std::move(vecs));
  }

  auto rank_by_scores = [&](const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) {
                       return scores[a] > scores[b];
                     });
    RankedList run;
    for (auto i : order) run.items.push_back({articles[i].url, scores[i]});
    return run;
  };

  std::vector<QueryFeatures> features;
  for (const auto& qid : qids) {
    const Tweet& tweet = require_tweet(by_id, qid);
    TokenList tokens = normalize(tweet.text, norm);
    auto qvec = encode(model, make_tweet_input(model.vocab, tokens));

    std::vector<ScorerRanking> scorers;
    RankedList primary;
    for (const auto& name : scorer_names) {
      ScorerRanking sr;
      sr.name = name;
      if (name.starts_with("tfidf:")) {
        sr.ranking = tfidf_rank(tfidf_models.at(name.substr(6)), tokens,
                                articles.size());
      } else {
        const auto& vecs = article_vecs.at(name.substr(8));
        std::vector<double> scores(vecs.size());
        for (std::size_t i = 0; i < vecs.size(); ++i)
          scores[i] = dot(qvec, vecs[i]);
        sr.ranking = rank_by_scores(scores);
      }
      if (name == "encoder:cts") primary = sr.ranking;
      scorers.push_back(std::move(sr));
    }
    primary.query_id = qid;
    auto qf = build_features(qid, primary, scorers, layout, opt.topk);
    features.push_back(std::move(qf));
  }

  auto header = make_header(
      "features",
      {"encoder=" + opt.encoder_path, "topk=" + std::to_string(opt.topk),
       "norm=" + norm.fingerprint(), "seed=" + std::to_string(opt.base.seed)});
  emit(opt.base.output_path, format_features(features, layout, header));
  return 0;
}

struct RerankTrainOptions {
  std::string features_path;
  std::string qrels_path;
  std::string output_path;
  GbdtConfig gbdt;
  std::uint64_t seed = 42;
};

int cmd_rerank_train(const RerankTrainOptions& opt) {
  auto [features, layout] = load_features(opt.features_path);
  auto qrels = load_qrels(opt.qrels_path);
  auto model = train_lambdamart(features, qrels, opt.gbdt, layout);

  auto header = make_header(
      "rerank-train",
      {"features=" + opt.features_path, "layout=" + layout,
       "trees=" + std::to_string(opt.gbdt.trees),
       "depth=" + std::to_string(opt.gbdt.max_depth),
       "lr=" + format_double(opt.gbdt.learning_rate),
       "min_leaf=" + std::to_string(opt.gbdt.min_samples_leaf),
       "metric_k=" + std::to_string(opt.gbdt.metric_k),
       "ndcg=" + std::to_string(opt.gbdt.use_ndcg ? 1 : 0),
       "seed=" + std::to_string(opt.seed)});
  json doc = json::parse(gbdt_to_json(model));
  doc["meta"] = {{"config_hash", header_hash(header)}, {"seed", opt.seed}};
  if (opt.output_path.empty())
    std::cout << doc.dump() << "\n";
  else
    atomic_write_file(opt.output_path, doc.dump());

  auto names = feature_names(layout);
  auto importance = feature_importance(model);
  std::cerr << "rerank-train: " << model.trees.size() << " trees kept\n";
  for (std::size_t f = 0; f < names.size(); ++f)
    std::cerr << "  " << names[f] << "\t" << format_double(importance[f])
              << "\n";
  return 0;
}

struct RerankOptions {
  std::string features_path;
  std::string model_path;
  std::string output_path;
  std::size_t topk = 100;
  std::uint64_t seed = 42;
};

int cmd_rerank(const RerankOptions& opt) {
  auto [features, layout] = load_features(opt.features_path);
  auto model = load_gbdt(opt.model_path);
  if (model.layout != layout)
    throw LayoutMismatchError("rerank: model layout " + model.layout +
                              " does not match features layout " + layout);
  std::vector<RankedList> runs;
  for (const auto& qf : features) {
    auto run = rerank(model, qf);
    if (run.items.size() > opt.topk) run.items.resize(opt.topk);
    runs.push_back(std::move(run));
  }
  auto header = make_header("rerank", {"features=" + opt.features_path,
                                       "model=" + opt.model_path,
                                       "layout=" + layout,
                                       "topk=" + std::to_string(opt.topk),
                                       "seed=" + std::to_string(opt.seed)});
  emit(opt.output_path, format_predictions(runs, "lambdamart", header));
  return 0;
}

struct EvaluateOptions {
  std::string predictions_path;
  std::string qrels_path;
  std::string output_path;
  bool table = false;
};

int cmd_evaluate(const EvaluateOptions& opt) {
  std::string tag;
  auto runs = load_predictions(opt.predictions_path, &tag);
  auto qrels = load_qrels(opt.qrels_path);
  auto metrics = evaluate(runs, qrels);
  auto header = make_header("evaluate",
                            {"predictions=" + opt.predictions_path,
                             "qrels=" + opt.qrels_path, "tag=" + tag});
  emit(opt.output_path, metrics_to_json(metrics, header));
  if (opt.table)
    std::cout << metrics_table({{tag.empty() ? "run" : tag, metrics}});
  return 0;
}

struct KappaOptions {
  std::string input_path;
  std::string statistic = "fleiss";
  std::string output_path;
};

int cmd_kappa(const KappaOptions& opt) {
  std::vector<std::vector<int>> rows;
  std::size_t lineno = 0;
  std::size_t width = 0;
  for (const auto& raw : read_lines(opt.input_path)) {
    ++lineno;
    std::string t{trim(raw)};
    if (t.empty() || t[0] == '#') continue;
    auto cols = split_tabs(t);
    if (cols.size() < 3)
      throw FormatError(opt.input_path + ":" + std::to_string(lineno) +
                        ": expected item id and at least 2 rater columns");
    if (width == 0)
      width = cols.size();
    else if (cols.size() != width)
      throw FormatError(opt.input_path + ":" + std::to_string(lineno) +
                        ": ragged rater columns");
    std::vector<int> ratings;
    for (std::size_t i = 1; i < cols.size(); ++i) {
      try {
        ratings.push_back(std::stoi(cols[i]));
      } catch (const std::exception&) {
        throw FormatError(opt.input_path + ":" + std::to_string(lineno) +
                          ": bad rating value");
      }
    }
    rows.push_back(std::move(ratings));
  }
  if (rows.empty()) throw FormatError(opt.input_path + ": no annotations");

  double kappa = 0.0;
  if (opt.statistic == "fleiss") {
    kappa = fleiss_kappa(rows);
  } else if (opt.statistic == "cohen") {
    if (width != 3)
      throw FormatError("cohen statistic needs exactly 2 rater columns");
    std::vector<int> a, b;
    for (const auto& row : rows) {
      a.push_back(row[0]);
      b.push_back(row[1]);
    }
    kappa = cohen_kappa(a, b);
  } else {
    throw FormatError("unknown statistic: " + opt.statistic);
  }

  auto header = make_header("kappa", {"input=" + opt.input_path,
                                      "statistic=" + opt.statistic});
  json doc;
  doc["meta"] = {{"tool", "claimmatch-kappa"}, {"config_hash", header_hash(header)}};
  doc["statistic"] = opt.statistic;
  doc["items"] = rows.size();
  doc["raters"] = width - 1;
  doc["kappa"] = kappa;
  emit(opt.output_path, doc.dump(2) + "\n");
  return 0;
}

void add_norm_flags(CLI::App* cmd, PipelineConfig& base) {
  cmd->add_option("--stopwords", base.stopwords_path,
                  "stopword file, one word per line (default: built-in list)");
  cmd->add_flag("--keep-handles", base.keep_handles,
                "keep @handles instead of stripping them");
  cmd->add_flag("--no-stem", base.no_stem, "disable stemming");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"previously fact-checked claim detection pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; section per "
                                 "subcommand");

  NormalizeOptions normalize_opt;
  auto* normalize_cmd =
      app.add_subcommand("normalize", "normalize raw text lines to tokens");
  normalize_cmd->add_option("--input", normalize_opt.input_path, "text file")
      ->required();
  normalize_cmd->add_option("--output", normalize_opt.base.output_path,
                            "output token file (default: stdout)");
  add_norm_flags(normalize_cmd, normalize_opt.base);

  PipelineConfig stats_opt;
  auto* stats_cmd =
      app.add_subcommand("stats", "token statistics over a tweet corpus");
  stats_cmd->add_option("--tweets", stats_opt.tweets_path, "tweets JSONL")
      ->required();
  stats_cmd->add_option("--output", stats_opt.output_path, "stats JSON");
  add_norm_flags(stats_cmd, stats_opt);

  PipelineConfig triples_opt;
  auto* triples_cmd = app.add_subcommand(
      "triples", "resolve fact-check tweets to conversation triples");
  triples_cmd->add_option("--tweets", triples_opt.tweets_path, "tweets JSONL")
      ->required();
  triples_cmd
      ->add_option("--articles", triples_opt.articles_path, "articles JSONL")
      ->required();
  triples_cmd->add_option("--output", triples_opt.output_path,
                          "triples JSONL (default: stdout)");

  LabelOptions label_opt;
  auto* label_cmd = app.add_subcommand(
      "label", "distant-supervision labeling into a training split");
  label_cmd->add_option("--tweets", label_opt.base.tweets_path, "tweets JSONL")
      ->required();
  label_cmd
      ->add_option("--articles", label_opt.base.articles_path,
                   "articles JSONL")
      ->required();
  label_cmd
      ->add_option("--strategy", label_opt.base.strategy, "jaccard | cosine")
      ->check(CLI::IsMember({"jaccard", "cosine"}));
  label_cmd->add_option("--threshold", label_opt.base.threshold,
                        "keep pairs scoring strictly above this");
  label_cmd->add_option("--target", label_opt.base.target,
                        "conversation side: root | reply | best")
      ->check(CLI::IsMember({"root", "reply", "best"}));
  label_cmd->add_option("--encoder", label_opt.encoder_path,
                        "trained encoder (cosine strategy)");
  label_cmd->add_option("--output", label_opt.base.output_path, "split TSV");
  label_cmd->add_option("--seed", label_opt.base.seed, "seed");
  add_norm_flags(label_cmd, label_opt.base);

  BinsOptions bins_opt;
  auto* bins_cmd = app.add_subcommand(
      "bins", "score-bin table over distant-supervision pairs");
  bins_cmd->add_option("--tweets", bins_opt.label.base.tweets_path,
                       "tweets JSONL")
      ->required();
  bins_cmd
      ->add_option("--articles", bins_opt.label.base.articles_path,
                   "articles JSONL")
      ->required();
  bins_cmd
      ->add_option("--strategy", bins_opt.label.base.strategy,
                   "jaccard | cosine")
      ->check(CLI::IsMember({"jaccard", "cosine"}));
  bins_cmd->add_option("--target", bins_opt.label.base.target,
                       "root | reply | best")
      ->check(CLI::IsMember({"root", "reply", "best"}));
  bins_cmd->add_option("--encoder", bins_opt.label.encoder_path,
                       "trained encoder (cosine strategy)");
  bins_cmd->add_option("--annotations", bins_opt.annotations_path,
                       "per-pair correctness TSV");
  bins_cmd->add_option("--output", bins_opt.label.base.output_path,
                       "bins TSV");
  bins_cmd->add_option("--seed", bins_opt.label.base.seed, "seed");
  add_norm_flags(bins_cmd, bins_opt.label.base);

  EstimateOptions estimate_opt;
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "matching-pair estimate from a bin table");
  estimate_cmd->add_option("--bins", estimate_opt.bins_path, "bins TSV")
      ->required();
  estimate_cmd
      ->add_option("--total", estimate_opt.total, "total pair population")
      ->required();
  estimate_cmd->add_option("--output", estimate_opt.output_path,
                           "estimate JSON (default: stdout)");

  TrainOptions train_opt;
  auto* train_cmd =
      app.add_subcommand("train", "train the bi-encoder on a labeled split");
  train_cmd->add_option("--tweets", train_opt.base.tweets_path, "tweets JSONL")
      ->required();
  train_cmd
      ->add_option("--articles", train_opt.base.articles_path,
                   "articles JSONL")
      ->required();
  train_cmd->add_option("--split", train_opt.split_path, "training split TSV")
      ->required();
  train_cmd->add_option("--clean-split", train_opt.clean_split_path,
                        "manually labeled split (seq/mix modes)");
  train_cmd->add_option("--mode", train_opt.mode, "only-crowd | seq | mix")
      ->check(CLI::IsMember({"only-crowd", "seq", "mix"}));
  train_cmd->add_option("--dev-qrels", train_opt.dev_qrels_path,
                        "dev qrels for checkpoint selection");
  train_cmd->add_option("--output", train_opt.base.output_path, "model JSON");
  train_cmd->add_option("--thresholds", train_opt.thresholds,
                        "comma list: retrain per threshold, emit dev table");
  train_cmd->add_option("--sweep-output", train_opt.sweep_output_path,
                        "threshold sweep table TSV");
  train_cmd->add_option("--lr", train_opt.train.lr, "learning rate");
  train_cmd->add_option("--tau-lr", train_opt.train.tau_lr,
                        "temperature learning rate");
  train_cmd->add_option("--tau-init", train_opt.train.tau_init,
                        "initial temperature");
  train_cmd->add_option("--alpha", train_opt.train.alpha,
                        "refurbishment momentum");
  train_cmd->add_option("--refurbish-start", train_opt.train.refurbish_start,
                        "first epoch with refurbishment (1-based)");
  train_cmd->add_option("--batch-size", train_opt.train.batch_size, "batch");
  train_cmd->add_option("--group-size", train_opt.train.group_size,
                        "shuffling group size");
  train_cmd->add_option("--epochs", train_opt.train.epochs, "epochs");
  train_cmd->add_option("--max-seq", train_opt.train.max_seq,
                        "max tokens per encoder input");
  train_cmd->add_option("--eval-every", train_opt.train.eval_every,
                        "dev evaluation interval in steps");
  train_cmd->add_flag("--unweighted", train_opt.unweighted,
                      "drop the squared-label loss weighting");
  train_cmd
      ->add_option("--prediction", train_opt.prediction,
                   "refurbishment prediction: softmax | cosine01")
      ->check(CLI::IsMember({"softmax", "cosine01"}));
  train_cmd->add_option("--weight-decay", train_opt.train.weight_decay,
                        "decoupled weight decay");
  train_cmd->add_option("--warmup", train_opt.train.warmup_fraction,
                        "warmup fraction of total steps");
  train_cmd->add_option("--embed-dim", train_opt.embed_dim, "embedding dim");
  train_cmd->add_option("--hidden-dim", train_opt.hidden_dim, "output dim");
  train_cmd->add_option("--min-count", train_opt.min_count,
                        "min token frequency for a dedicated vocab id");
  train_cmd->add_option("--hash-buckets", train_opt.hash_buckets,
                        "OOV hash buckets");
  train_cmd->add_option("--fields", train_opt.fields,
                        "article fields for encoding: c | ct | cts")
      ->check(CLI::IsMember({"c", "ct", "cts"}));
  train_cmd->add_option("--seed", train_opt.base.seed, "seed");
  add_norm_flags(train_cmd, train_opt.base);

  RetrieveOptions retrieve_opt;
  auto* retrieve_cmd =
      app.add_subcommand("retrieve", "rank articles for query tweets");
  retrieve_cmd
      ->add_option("--tweets", retrieve_opt.base.tweets_path, "tweets JSONL")
      ->required();
  retrieve_cmd
      ->add_option("--articles", retrieve_opt.base.articles_path,
                   "articles JSONL")
      ->required();
  retrieve_cmd->add_option("--qrels", retrieve_opt.base.qrels_path,
                           "qrels naming the queries");
  retrieve_cmd->add_option("--queries", retrieve_opt.queries_path,
                           "file with one query tweet id per line");
  retrieve_cmd
      ->add_option("--model", retrieve_opt.model, "bm25 | tfidf | encoder")
      ->check(CLI::IsMember({"bm25", "tfidf", "encoder"}));
  retrieve_cmd->add_option("--fields", retrieve_opt.fields, "c | ct | cts")
      ->check(CLI::IsMember({"c", "ct", "cts"}));
  retrieve_cmd->add_option("--encoder", retrieve_opt.encoder_path,
                           "trained encoder model (encoder retrieval)");
  retrieve_cmd->add_option("--topk", retrieve_opt.topk, "list depth");
  retrieve_cmd->add_option("--output", retrieve_opt.base.output_path,
                           "predictions TSV");
  retrieve_cmd->add_option("--seed", retrieve_opt.base.seed, "seed");
  add_norm_flags(retrieve_cmd, retrieve_opt.base);

  FeaturesOptions features_opt;
  auto* features_cmd = app.add_subcommand(
      "features", "re-ranking features for candidate lists");
  features_cmd
      ->add_option("--tweets", features_opt.base.tweets_path, "tweets JSONL")
      ->required();
  features_cmd
      ->add_option("--articles", features_opt.base.articles_path,
                   "articles JSONL")
      ->required();
  features_cmd->add_option("--qrels", features_opt.base.qrels_path,
                           "qrels naming the queries");
  features_cmd->add_option("--queries", features_opt.queries_path,
                           "file with one query tweet id per line");
  features_cmd->add_option("--encoder", features_opt.encoder_path,
                           "trained encoder model")
      ->required();
  features_cmd->add_option("--layout", features_opt.layout,
                           "ensemble | single")
      ->check(CLI::IsMember({"ensemble", "single"}));
  features_cmd->add_option("--topk", features_opt.topk,
                           "candidates per query");
  features_cmd->add_option("--output", features_opt.base.output_path,
                           "features TSV");
  features_cmd->add_option("--seed", features_opt.base.seed, "seed");
  add_norm_flags(features_cmd, features_opt.base);

  RerankTrainOptions rerank_train_opt;
  auto* rerank_train_cmd =
      app.add_subcommand("rerank-train", "fit the re-ranking model");
  rerank_train_cmd
      ->add_option("--features", rerank_train_opt.features_path,
                   "features TSV")
      ->required();
  rerank_train_cmd
      ->add_option("--qrels", rerank_train_opt.qrels_path, "training qrels")
      ->required();
  rerank_train_cmd->add_option("--output", rerank_train_opt.output_path,
                               "model JSON");
  rerank_train_cmd->add_option("--trees", rerank_train_opt.gbdt.trees,
                               "boosting rounds");
  rerank_train_cmd->add_option("--max-depth", rerank_train_opt.gbdt.max_depth,
                               "tree depth");
  rerank_train_cmd->add_option("--learning-rate",
                               rerank_train_opt.gbdt.learning_rate,
                               "shrinkage");
  rerank_train_cmd->add_option("--min-leaf",
                               rerank_train_opt.gbdt.min_samples_leaf,
                               "min samples per leaf");
  rerank_train_cmd->add_option("--metric-k", rerank_train_opt.gbdt.metric_k,
                               "cutoff for the lambda metric");
  rerank_train_cmd->add_flag("--ndcg", rerank_train_opt.gbdt.use_ndcg,
                             "weight lambdas by NDCG deltas instead of AP");
  rerank_train_cmd->add_option("--seed", rerank_train_opt.seed, "seed");

  RerankOptions rerank_opt;
  auto* rerank_cmd =
      app.add_subcommand("rerank", "re-rank candidates with a trained model");
  rerank_cmd
      ->add_option("--features", rerank_opt.features_path, "features TSV")
      ->required();
  rerank_cmd->add_option("--model", rerank_opt.model_path, "model JSON")
      ->required();
  rerank_cmd->add_option("--topk", rerank_opt.topk, "output depth");
  rerank_cmd->add_option("--output", rerank_opt.output_path,
                         "predictions TSV");
  rerank_cmd->add_option("--seed", rerank_opt.seed, "seed");

  EvaluateOptions evaluate_opt;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "ranking metrics against qrels");
  evaluate_cmd
      ->add_option("--predictions", evaluate_opt.predictions_path,
                   "predictions TSV")
      ->required();
  evaluate_cmd->add_option("--qrels", evaluate_opt.qrels_path, "qrels TSV")
      ->required();
  evaluate_cmd->add_option("--output", evaluate_opt.output_path,
                           "metrics JSON (default: stdout)");
  evaluate_cmd->add_flag("--table", evaluate_opt.table,
                         "also print an aligned metrics table");

  KappaOptions kappa_opt;
  auto* kappa_cmd =
      app.add_subcommand("kappa", "inter-annotator agreement statistics");
  kappa_cmd->add_option("--input", kappa_opt.input_path,
                        "TSV: item id then one column per rater")
      ->required();
  kappa_cmd->add_option("--statistic", kappa_opt.statistic,
                        "fleiss | cohen")
      ->check(CLI::IsMember({"fleiss", "cohen"}));
  kappa_cmd->add_option("--output", kappa_opt.output_path,
                        "kappa JSON (default: stdout)");

  normalize_cmd->callback([&]() { cmd_normalize(normalize_opt); });
  stats_cmd->callback([&]() { cmd_stats(stats_opt); });
  triples_cmd->callback([&]() { cmd_triples(triples_opt); });
  label_cmd->callback([&]() { cmd_label(label_opt); });
  bins_cmd->callback([&]() { cmd_bins(bins_opt); });
  estimate_cmd->callback([&]() { cmd_estimate(estimate_opt); });
  int train_rc = 0;
  train_cmd->callback([&]() { train_rc = cmd_train(train_opt); });
  retrieve_cmd->callback([&]() { cmd_retrieve(retrieve_opt); });
  features_cmd->callback([&]() { cmd_features(features_opt); });
  rerank_train_cmd->callback([&]() { cmd_rerank_train(rerank_train_opt); });
  rerank_cmd->callback([&]() { cmd_rerank(rerank_opt); });
  evaluate_cmd->callback([&]() { cmd_evaluate(evaluate_opt); });
  kappa_cmd->callback([&]() { cmd_kappa(kappa_opt); });

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->configurable(true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return train_rc;
}

}  // namespace claimmatch
