#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimmatch/corpus.hpp"
#include "claimmatch/encoder.hpp"
#include "claimmatch/matrix.hpp"
#include "claimmatch/rng.hpp"

namespace claimmatch {

enum class PredictionKind { kSoftmax, kCosine01 };

PredictionKind prediction_kind_from_string(const std::string& s);
std::string prediction_kind_to_string(PredictionKind kind);

struct TrainConfig {
  double lr = 1e-5;
  double tau_lr = 0.4;
  double tau_init = 1.0;
  double tau_min = 1e-3;
  double alpha = 0.9;               // refurbishment momentum
  std::size_t refurbish_start = 2;  // 1-based epoch
  std::size_t batch_size = 8;
  std::size_t group_size = 4;
  std::size_t epochs = 10;
  std::size_t max_seq = 128;
  std::size_t eval_every = 250;  // steps; capped at one epoch
  bool weighted = true;
  PredictionKind prediction = PredictionKind::kSoftmax;
  double weight_decay = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 42;

  std::string fingerprint() const;
};

struct MnrResult {
  double loss = 0.0;
  Matrix grad_c;  // m x h
  Matrix grad_v;  // m x h
  double grad_tau = 0.0;
};

// loss = -(1/m) sum_i a_i (c_i.v_i / tau - log sum_j exp(c_i.v_j / tau))
// where a_i = labels[i] unweighted and labels[i]^2 weighted. Rows of C pair
// with rows of V; the other rows of V act as in-batch negatives. Throws
// NumericalError when the loss is not finite.
MnrResult mnr_loss(const Matrix& c, const Matrix& v,
                   std::span<const double> labels, double tau, bool weighted);

// y' = alpha * y + (1 - alpha) * y_hat, elementwise.
std::vector<double> refurbish(std::span<const double> labels,
                              std::span<const double> predictions,
                              double alpha);

// In-batch probability that pair i's own article tops the softmax:
// y_hat_i = exp(c_i.v_i/tau) / sum_j exp(c_i.v_j/tau). The cosine01 variant
// maps the diagonal cosine to (1+cos)/2 instead.
std::vector<double> model_prediction(const Matrix& c, const Matrix& v,
                                     double tau, PredictionKind kind);

// Greedy nearest-neighbor groups of group_size by cosine over the given
// embeddings (one row per pair); groups are emitted in random order and the
// concatenation is the epoch's pair order.
std::vector<std::size_t> group_shuffle(const Matrix& embeddings,
                                       std::size_t group_size, Rng& rng);

struct TrainingPair {
  std::string tweet_id;
  std::string article_url;
  double label = 1.0;
};

struct TrainData {
  std::vector<TrainingPair> pairs;
  std::unordered_map<std::string, std::string> tweet_text;  // id -> raw text
  std::unordered_map<std::string, FactCheckArticle> articles;
};

struct DevSet {
  std::vector<std::pair<std::string, std::string>> queries;  // id, raw text
  Qrels qrels;
  std::vector<FactCheckArticle> collection;
};

struct TrainResult {
  EncoderModel model;  // best dev checkpoint; last state when no dev set
  double tau = 1.0;
  std::vector<double> labels;  // final refurbished labels, aligned to pairs
  double best_dev_map5 = 0.0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  std::vector<double> epoch_losses;
  bool aborted = false;  // numerical failure; model is the last good one
};

// Full optimization loop: per epoch group_shuffle -> batches -> mnr_loss ->
// decoupled-weight-decay Adam step (temperature updated with its own learning
// rate, clamped at tau_min); refurbishment after each epoch from
// refurbish_start on; periodic dev evaluation keeps the best-MAP@5 snapshot.
TrainResult train(const EncoderModel& init, const TrainData& data,
                  const std::optional<DevSet>& dev, const TrainConfig& cfg,
                  const NormConfig& norm);

double dev_map5(const EncoderModel& model, const DevSet& dev,
                const NormConfig& norm);

}  // namespace claimmatch
