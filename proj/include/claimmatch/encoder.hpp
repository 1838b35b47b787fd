#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/matrix.hpp"
#include "claimmatch/retrieval.hpp"
#include "claimmatch/textnorm.hpp"

namespace claimmatch {

// Token id layout: 0 = CLS, 1 = SEP, then dedicated ids in sorted token
// order, then hash buckets for everything else.
struct Vocab {
  static constexpr std::uint32_t kClsId = 0;
  static constexpr std::uint32_t kSepId = 1;
  static constexpr std::uint32_t kNumSpecials = 2;

  std::vector<std::string> tokens;  // dedicated tokens, sorted
  std::unordered_map<std::string, std::uint32_t> ids;
  std::uint32_t hash_buckets = 0;

  std::uint32_t size() const {
    return kNumSpecials + static_cast<std::uint32_t>(tokens.size()) +
           hash_buckets;
  }
  std::uint32_t token_id(const std::string& tok) const;
  static bool is_special(std::uint32_t id) { return id < kNumSpecials; }
};

// Tokens seen at least min_count times get dedicated ids; the rest share
// hash buckets.
Vocab build_vocab(std::span<const TokenList> docs, std::size_t min_count,
                  std::uint32_t hash_buckets);

enum class Side { kTweet, kArticle };

struct EncodedInput {
  std::vector<std::uint32_t> ids;
  Side side = Side::kTweet;

  std::size_t content_tokens() const;
};

struct EncoderConfig {
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t max_seq = 128;
  std::size_t min_count = 1;
  std::uint32_t hash_buckets = 64;
  std::uint64_t seed = 42;
  FieldCombo article_fields = FieldCombo::kClaimTitleSubtitle;
  std::string norm_fingerprint;
};

// Both sides share every parameter. Output vectors are mean-pooled token
// embeddings passed through one affine projection, then L2-normalized.
struct EncoderModel {
  EncoderConfig cfg;
  Vocab vocab;
  Matrix embeddings;            // vocab.size() x embed_dim
  Matrix projection;            // embed_dim x hidden_dim
  std::vector<double> bias;     // hidden_dim

  std::size_t parameter_count() const {
    return embeddings.data.size() + projection.data.size() + bias.size();
  }
};

EncoderModel init_encoder(Vocab vocab, const EncoderConfig& cfg);

// Tweet side: CLS tokens SEP.
EncodedInput make_tweet_input(const Vocab& vocab, const TokenList& tokens);
// Article side follows the configured field combination:
//   c   -> CLS claim SEP
//   ct  -> CLS title SEP claim SEP
//   cts -> CLS title SEP subtitle SEP claim SEP
EncodedInput make_article_input(const Vocab& vocab, const TokenList& title,
                                const TokenList& subtitle,
                                const TokenList& claim, FieldCombo combo);

EncodedInput make_article_input(const EncoderModel& model,
                                const FactCheckArticle& article,
                                const NormConfig& norm);

// Removes content tokens one at a time, always from the currently longer
// input, until both fit max_seq. Separators are never dropped.
void truncate_pair(EncodedInput& a, EncodedInput& b, std::size_t max_seq);

// Forward pass intermediates, kept for backpropagation.
struct EncodeTrace {
  std::vector<std::uint32_t> ids;
  std::vector<double> pooled;    // mean of token embeddings
  std::vector<double> pre_norm;  // affine output before normalization
  double norm = 0.0;
  std::vector<double> unit;      // final unit-length vector
};

EncodeTrace encode_with_trace(const EncoderModel& model,
                              const EncodedInput& input);
// Unit-norm vector; throws EmptyInput when the input has no content tokens.
std::vector<double> encode(const EncoderModel& model,
                           const EncodedInput& input);

double similarity(const EncoderModel& model, const EncodedInput& a,
                  const EncodedInput& b);

// Cosine ranking of articles against a tweet, ties broken by ascending
// article position. The combo overload overrides the model's configured
// article field layout.
RankedList encoder_rank(const EncoderModel& model,
                        std::span<const FactCheckArticle> articles,
                        const std::string& tweet_text, const NormConfig& norm,
                        std::size_t k);
RankedList encoder_rank(const EncoderModel& model,
                        std::span<const FactCheckArticle> articles,
                        const std::string& tweet_text, const NormConfig& norm,
                        std::size_t k, FieldCombo combo);

std::string encoder_to_json(const EncoderModel& model);
EncoderModel encoder_from_json(const std::string& text);
void save_encoder(const EncoderModel& model, const std::string& path);
EncoderModel load_encoder(const std::string& path);

}  // namespace claimmatch
