#include "claimmatch/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "claimmatch/errors.hpp"
#include "claimmatch/rng.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

using json = nlohmann::json;

std::uint32_t Vocab::token_id(const std::string& tok) const {
  auto it = ids.find(tok);
  if (it != ids.end()) return it->second;
  std::uint32_t base = kNumSpecials + static_cast<std::uint32_t>(tokens.size());
  return base + static_cast<std::uint32_t>(fnv1a64(tok) % hash_buckets);
}

Vocab build_vocab(std::span<const TokenList> docs, std::size_t min_count,
                  std::uint32_t hash_buckets) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs)
    for (const auto& tok : doc) ++counts[tok];
  Vocab vocab;
  vocab.hash_buckets = std::max<std::uint32_t>(1, hash_buckets);
  for (const auto& [tok, count] : counts)
    if (count >= min_count) vocab.tokens.push_back(tok);
  // already sorted via std::map iteration order
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
    vocab.ids.emplace(vocab.tokens[i],
                      Vocab::kNumSpecials + static_cast<std::uint32_t>(i));
  return vocab;
}

std::size_t EncodedInput::content_tokens() const {
  std::size_t n = 0;
  for (auto id : ids)
    if (!Vocab::is_special(id)) ++n;
  return n;
}

EncoderModel init_encoder(Vocab vocab, const EncoderConfig& cfg) {
  EncoderModel model;
  model.cfg = cfg;
  model.vocab = std::move(vocab);
  Rng rng(cfg.seed);
  model.embeddings = Matrix(model.vocab.size(), cfg.embed_dim);
  for (auto& v : model.embeddings.data) v = rng.uniform(-0.05, 0.05);
  model.projection = Matrix(cfg.embed_dim, cfg.hidden_dim);
  double limit = std::sqrt(
      6.0 / static_cast<double>(cfg.embed_dim + cfg.hidden_dim));
  for (auto& v : model.projection.data) v = rng.uniform(-limit, limit);
  model.bias.assign(cfg.hidden_dim, 0.0);
  return model;
}

namespace {

void append_tokens(const Vocab& vocab, const TokenList& tokens,
                   std::vector<std::uint32_t>& out) {
  for (const auto& tok : tokens) out.push_back(vocab.token_id(tok));
}

}  // namespace

EncodedInput make_tweet_input(const Vocab& vocab, const TokenList& tokens) {
  EncodedInput input;
  input.side = Side::kTweet;
  input.ids.push_back(Vocab::kClsId);
  append_tokens(vocab, tokens, input.ids);
  input.ids.push_back(Vocab::kSepId);
  return input;
}

EncodedInput make_article_input(const Vocab& vocab, const TokenList& title,
                                const TokenList& subtitle,
                                const TokenList& claim, FieldCombo combo) {
  EncodedInput input;
  input.side = Side::kArticle;
  input.ids.push_back(Vocab::kClsId);
  if (combo == FieldCombo::kClaimTitle ||
      combo == FieldCombo::kClaimTitleSubtitle) {
    append_tokens(vocab, title, input.ids);
    input.ids.push_back(Vocab::kSepId);
  }
  if (combo == FieldCombo::kClaimTitleSubtitle) {
    append_tokens(vocab, subtitle, input.ids);
    input.ids.push_back(Vocab::kSepId);
  }
  append_tokens(vocab, claim, input.ids);
  input.ids.push_back(Vocab::kSepId);
  return input;
}

EncodedInput make_article_input(const EncoderModel& model,
                                const FactCheckArticle& article,
                                const NormConfig& norm) {
  return make_article_input(model.vocab, normalize(article.title, norm),
                            normalize(article.subtitle, norm),
                            normalize(article.claim, norm),
                            model.cfg.article_fields);
}

namespace {

bool drop_last_content(EncodedInput& input) {
  for (std::size_t i = input.ids.size(); i-- > 0;) {
    if (!Vocab::is_special(input.ids[i])) {
      input.ids.erase(input.ids.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  return false;
}

}  // namespace

void truncate_pair(EncodedInput& a, EncodedInput& b, std::size_t max_seq) {
  while (a.ids.size() > max_seq || b.ids.size() > max_seq) {
    EncodedInput& longer = a.ids.size() >= b.ids.size() ? a : b;
    if (!drop_last_content(longer)) {
      longer.ids.resize(std::min(longer.ids.size(), max_seq));
      if (a.ids.size() <= max_seq && b.ids.size() <= max_seq) break;
    }
  }
}

EncodeTrace encode_with_trace(const EncoderModel& model,
                              const EncodedInput& input) {
  if (input.content_tokens() == 0)
    throw EmptyInputError("encode: input has no content tokens");
  EncodeTrace trace;
  trace.ids = input.ids;
  const std::size_t d = model.cfg.embed_dim;
  const std::size_t h = model.cfg.hidden_dim;
  trace.pooled.assign(d, 0.0);
  for (auto id : trace.ids) {
    auto row = model.embeddings.row(id);
    for (std::size_t i = 0; i < d; ++i) trace.pooled[i] += row[i];
  }
  const double inv_n = 1.0 / static_cast<double>(trace.ids.size());
  for (auto& v : trace.pooled) v *= inv_n;

  trace.pre_norm = model.bias;
  for (std::size_t i = 0; i < d; ++i) {
    const double z = trace.pooled[i];
    if (z == 0.0) continue;
    auto row = model.projection.row(i);
    for (std::size_t j = 0; j < h; ++j) trace.pre_norm[j] += z * row[j];
  }

  trace.norm = l2_norm(trace.pre_norm);
  if (!std::isfinite(trace.norm) || trace.norm <= 0.0)
    throw NumericalError("encode: degenerate pre-normalization vector");
  trace.unit.resize(h);
  const double inv = 1.0 / trace.norm;
  for (std::size_t j = 0; j < h; ++j) trace.unit[j] = trace.pre_norm[j] * inv;
  return trace;
}

std::vector<double> encode(const EncoderModel& model,
                           const EncodedInput& input) {
  return encode_with_trace(model, input).unit;
}

double similarity(const EncoderModel& model, const EncodedInput& a,
                  const EncodedInput& b) {
  auto va = encode(model, a);
  auto vb = encode(model, b);
  return dot(va, vb);
}

RankedList encoder_rank(const EncoderModel& model,
                        std::span<const FactCheckArticle> articles,
                        const std::string& tweet_text, const NormConfig& norm,
                        std::size_t k) {
  return encoder_rank(model, articles, tweet_text, norm, k,
                      model.cfg.article_fields);
}

RankedList encoder_rank(const EncoderModel& model,
                        std::span<const FactCheckArticle> articles,
                        const std::string& tweet_text, const NormConfig& norm,
                        std::size_t k, FieldCombo combo) {
  if (articles.empty()) throw EmptyIndexError("encoder_rank: no articles");
  auto query = encode(model, make_tweet_input(model.vocab,
                                              normalize(tweet_text, norm)));
  std::vector<double> scores(articles.size());
  for (std::size_t i = 0; i < articles.size(); ++i) {
    auto vec = encode(
        model, make_article_input(model.vocab,
                                  normalize(articles[i].title, norm),
                                  normalize(articles[i].subtitle, norm),
                                  normalize(articles[i].claim, norm), combo));
    scores[i] = dot(query, vec);
  }
  std::vector<std::size_t> order(articles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  RankedList result;
  for (std::size_t i = 0; i < order.size() && i < k; ++i)
    result.items.push_back({articles[order[i]].url, scores[order[i]]});
  return result;
}

namespace {

constexpr int kModelVersion = 1;

}  // namespace

std::string encoder_to_json(const EncoderModel& model) {
  json doc;
  doc["version"] = kModelVersion;
  doc["config"] = {
      {"embed_dim", model.cfg.embed_dim},
      {"hidden_dim", model.cfg.hidden_dim},
      {"max_seq", model.cfg.max_seq},
      {"min_count", model.cfg.min_count},
      {"hash_buckets", model.cfg.hash_buckets},
      {"seed", model.cfg.seed},
      {"article_fields", field_combo_to_string(model.cfg.article_fields)},
      {"norm_fingerprint", model.cfg.norm_fingerprint},
  };
  doc["vocab"] = {{"tokens", model.vocab.tokens},
                  {"hash_buckets", model.vocab.hash_buckets}};
  doc["embeddings"] = model.embeddings.data;
  doc["projection"] = model.projection.data;
  doc["bias"] = model.bias;
  return doc.dump();
}

EncoderModel encoder_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("encoder model: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kModelVersion)
      throw FormatError("encoder model: unsupported version");
    EncoderModel model;
    const auto& cfg = doc.at("config");
    model.cfg.embed_dim = cfg.at("embed_dim").get<std::size_t>();
    model.cfg.hidden_dim = cfg.at("hidden_dim").get<std::size_t>();
    model.cfg.max_seq = cfg.at("max_seq").get<std::size_t>();
    model.cfg.min_count = cfg.at("min_count").get<std::size_t>();
    model.cfg.hash_buckets = cfg.at("hash_buckets").get<std::uint32_t>();
    model.cfg.seed = cfg.at("seed").get<std::uint64_t>();
    model.cfg.article_fields =
        field_combo_from_string(cfg.at("article_fields").get<std::string>());
    model.cfg.norm_fingerprint =
        cfg.at("norm_fingerprint").get<std::string>();
    model.vocab.tokens =
        doc.at("vocab").at("tokens").get<std::vector<std::string>>();
    model.vocab.hash_buckets =
        doc.at("vocab").at("hash_buckets").get<std::uint32_t>();
    for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i)
      model.vocab.ids.emplace(
          model.vocab.tokens[i],
          Vocab::kNumSpecials + static_cast<std::uint32_t>(i));
    model.embeddings = Matrix(model.vocab.size(), model.cfg.embed_dim);
    model.embeddings.data = doc.at("embeddings").get<std::vector<double>>();
    model.projection = Matrix(model.cfg.embed_dim, model.cfg.hidden_dim);
    model.projection.data = doc.at("projection").get<std::vector<double>>();
    model.bias = doc.at("bias").get<std::vector<double>>();
    if (model.embeddings.data.size() !=
            model.embeddings.rows * model.embeddings.cols ||
        model.projection.data.size() !=
            model.projection.rows * model.projection.cols ||
        model.bias.size() != model.cfg.hidden_dim)
      throw FormatError("encoder model: parameter shapes inconsistent");
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("encoder model: ") + e.what());
  }
}

void save_encoder(const EncoderModel& model, const std::string& path) {
  atomic_write_file(path, encoder_to_json(model));
}

EncoderModel load_encoder(const std::string& path) {
  return encoder_from_json(read_file(path));
}

}  // namespace claimmatch
