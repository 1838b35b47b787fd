#include "claimmatch/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "claimmatch/errors.hpp"
#include "claimmatch/evalmetrics.hpp"
#include "claimmatch/util.hpp"

namespace claimmatch {

PredictionKind prediction_kind_from_string(const std::string& s) {
  if (s == "softmax") return PredictionKind::kSoftmax;
  if (s == "cosine01") return PredictionKind::kCosine01;
  throw FormatError("unknown prediction kind: " + s +
                    " (expected softmax or cosine01)");
}

std::string prediction_kind_to_string(PredictionKind kind) {
  return kind == PredictionKind::kSoftmax ? "softmax" : "cosine01";
}

std::string TrainConfig::fingerprint() const {
  std::ostringstream out;
  out << "lr=" << format_double(lr) << ";tau_lr=" << format_double(tau_lr)
      << ";tau_init=" << format_double(tau_init)
      << ";tau_min=" << format_double(tau_min)
      << ";alpha=" << format_double(alpha)
      << ";refurbish_start=" << refurbish_start
      << ";batch_size=" << batch_size << ";group_size=" << group_size
      << ";epochs=" << epochs << ";max_seq=" << max_seq
      << ";eval_every=" << eval_every << ";weighted=" << (weighted ? 1 : 0)
      << ";prediction=" << prediction_kind_to_string(prediction)
      << ";weight_decay=" << format_double(weight_decay)
      << ";beta1=" << format_double(beta1) << ";beta2=" << format_double(beta2)
      << ";adam_eps=" << format_double(adam_eps)
      << ";warmup=" << format_double(warmup_fraction) << ";seed=" << seed;
  return to_hex(fnv1a64(out.str()));
}

MnrResult mnr_loss(const Matrix& c, const Matrix& v,
                   std::span<const double> labels, double tau, bool weighted) {
  const std::size_t m = c.rows;
  const std::size_t h = c.cols;
  if (v.rows != m || v.cols != h || labels.size() != m)
    throw FormatError("mnr_loss: inconsistent batch shapes");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw NumericalError("mnr_loss: temperature must be positive");

  std::vector<double> a(m);
  for (std::size_t i = 0; i < m; ++i)
    a[i] = weighted ? labels[i] * labels[i] : labels[i];

  Matrix s(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      s.at(i, j) = dot(c.row(i), v.row(j)) / tau;

  Matrix p(m, m);
  std::vector<double> lse(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = s.at(i, 0);
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, s.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      p.at(i, j) = std::exp(s.at(i, j) - mx);
      sum += p.at(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) p.at(i, j) /= sum;
    lse[i] = mx + std::log(sum);
  }

  MnrResult res;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    res.loss -= inv_m * a[i] * (s.at(i, i) - lse[i]);
  if (!std::isfinite(res.loss))
    throw NumericalError("mnr_loss: non-finite loss");

  res.grad_c = Matrix(m, h);
  res.grad_v = Matrix(m, h);
  for (std::size_t i = 0; i < m; ++i) {
    const double scale = -a[i] * inv_m / tau;
    auto gc = res.grad_c.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double coeff =
          scale * ((i == j ? 1.0 : 0.0) - p.at(i, j));
      axpy(coeff, v.row(j), gc);
      axpy(coeff, c.row(i), res.grad_v.row(j));
    }
    double expected = 0.0;
    for (std::size_t j = 0; j < m; ++j) expected += p.at(i, j) * s.at(i, j);
    res.grad_tau += inv_m * a[i] * (s.at(i, i) - expected) / tau;
  }
  return res;
}

std::vector<double> refurbish(std::span<const double> labels,
                              std::span<const double> predictions,
                              double alpha) {
  if (labels.size() != predictions.size())
    throw FormatError("refurbish: size mismatch");
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = alpha * labels[i] + (1.0 - alpha) * predictions[i];
  return out;
}

std::vector<double> model_prediction(const Matrix& c, const Matrix& v,
                                     double tau, PredictionKind kind) {
  const std::size_t m = c.rows;
  if (v.rows != m || v.cols != c.cols)
    throw FormatError("model_prediction: inconsistent batch shapes");
  std::vector<double> out(m);
  if (kind == PredictionKind::kCosine01) {
    for (std::size_t i = 0; i < m; ++i)
      out[i] = (1.0 + dot(c.row(i), v.row(i))) / 2.0;
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> s(m);
    double mx = -1e300;
    for (std::size_t j = 0; j < m; ++j) {
      s[j] = dot(c.row(i), v.row(j)) / tau;
      mx = std::max(mx, s[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += std::exp(s[j] - mx);
    out[i] = std::exp(s[i] - mx) / sum;
  }
  return out;
}

std::vector<std::size_t> group_shuffle(const Matrix& embeddings,
                                       std::size_t group_size, Rng& rng) {
  const std::size_t n = embeddings.rows;
  std::vector<std::size_t> unassigned(n);
  for (std::size_t i = 0; i < n; ++i) unassigned[i] = i;
  std::vector<std::vector<std::size_t>> groups;
  while (!unassigned.empty()) {
    std::size_t pick = rng.index(unassigned.size());
    std::size_t seed = unassigned[pick];
    unassigned.erase(unassigned.begin() + static_cast<std::ptrdiff_t>(pick));
    std::vector<std::size_t> group{seed};
    while (group.size() < group_size && !unassigned.empty()) {
      double best = -1e300;
      std::size_t best_pos = 0;
      for (std::size_t pos = 0; pos < unassigned.size(); ++pos) {
        double sim = dot(embeddings.row(seed), embeddings.row(unassigned[pos]));
        if (sim > best) {
          best = sim;
          best_pos = pos;
        }
      }
      group.push_back(unassigned[best_pos]);
      unassigned.erase(unassigned.begin() +
                       static_cast<std::ptrdiff_t>(best_pos));
    }
    groups.push_back(std::move(group));
  }
  rng.shuffle(groups);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (const auto& group : groups)
    order.insert(order.end(), group.begin(), group.end());
  return order;
}

namespace {

struct Grads {
  Matrix embeddings;
  Matrix projection;
  std::vector<double> bias;

  explicit Grads(const EncoderModel& model)
      : embeddings(model.embeddings.rows, model.embeddings.cols),
        projection(model.projection.rows, model.projection.cols),
        bias(model.bias.size(), 0.0) {}

  void zero() {
    embeddings.fill(0.0);
    projection.fill(0.0);
    std::fill(bias.begin(), bias.end(), 0.0);
  }
};

// Chain rule through L2 normalization, affine projection and mean pooling.
void backprop_unit(const EncoderModel& model, const EncodeTrace& trace,
                   std::span<const double> grad_unit, Grads& grads) {
  const std::size_t d = model.cfg.embed_dim;
  const std::size_t h = model.cfg.hidden_dim;
  const double cg = dot(trace.unit, grad_unit);
  std::vector<double> gu(h);
  for (std::size_t j = 0; j < h; ++j)
    gu[j] = (grad_unit[j] - cg * trace.unit[j]) / trace.norm;
  for (std::size_t j = 0; j < h; ++j) grads.bias[j] += gu[j];
  std::vector<double> gz(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    auto w_row = model.projection.row(i);
    auto gw_row = grads.projection.row(i);
    const double zi = trace.pooled[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      gw_row[j] += zi * gu[j];
      acc += w_row[j] * gu[j];
    }
    gz[i] = acc;
  }
  const double inv_n = 1.0 / static_cast<double>(trace.ids.size());
  for (auto id : trace.ids) {
    auto e_row = grads.embeddings.row(id);
    for (std::size_t i = 0; i < d; ++i) e_row[i] += gz[i] * inv_n;
  }
}

struct AdamState {
  Matrix m_emb, v_emb, m_proj, v_proj;
  std::vector<double> m_bias, v_bias;
  double m_tau = 0.0, v_tau = 0.0;
  std::size_t t = 0;

  explicit AdamState(const EncoderModel& model)
      : m_emb(model.embeddings.rows, model.embeddings.cols),
        v_emb(model.embeddings.rows, model.embeddings.cols),
        m_proj(model.projection.rows, model.projection.cols),
        v_proj(model.projection.rows, model.projection.cols),
        m_bias(model.bias.size(), 0.0),
        v_bias(model.bias.size(), 0.0) {}
};

// Decoupled weight decay: theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd*theta)
void adam_array(std::span<double> theta, std::span<const double> grad,
                std::span<double> m, std::span<double> v, double lr,
                double wd, const TrainConfig& cfg, double bc1, double bc2) {
  for (std::size_t k = 0; k < theta.size(); ++k) {
    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double m_hat = m[k] / bc1;
    const double v_hat = v[k] / bc2;
    theta[k] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.adam_eps) +
                      wd * theta[k]);
  }
}

struct Checkpoint {
  EncoderModel model;
  double tau;
};

}  // namespace

double dev_map5(const EncoderModel& model, const DevSet& dev,
                const NormConfig& norm) {
  std::vector<std::vector<double>> doc_vecs;
  doc_vecs.reserve(dev.collection.size());
  for (const auto& article : dev.collection)
    doc_vecs.push_back(encode(model, make_article_input(model, article, norm)));
  std::vector<RankedList> runs;
  runs.reserve(dev.queries.size());
  for (const auto& [qid, text] : dev.queries) {
    auto qvec =
        encode(model, make_tweet_input(model.vocab, normalize(text, norm)));
    std::vector<double> scores(doc_vecs.size());
    for (std::size_t i = 0; i < doc_vecs.size(); ++i)
      scores[i] = dot(qvec, doc_vecs[i]);
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) {
                       return scores[a] > scores[b];
                     });
    RankedList run;
    run.query_id = qid;
    for (std::size_t i = 0; i < order.size() && i < 5; ++i)
      run.items.push_back({dev.collection[order[i]].url, scores[order[i]]});
    runs.push_back(std::move(run));
  }
  return evaluate(runs, dev.qrels).map_at.at(5);
}

TrainResult train(const EncoderModel& init, const TrainData& data,
                  const std::optional<DevSet>& dev, const TrainConfig& cfg,
                  const NormConfig& norm) {
  if (data.pairs.empty()) throw EmptySplitError("train: empty split");

  EncoderModel model = init;
  const std::size_t n = data.pairs.size();
  std::vector<EncodedInput> tweet_inputs(n), article_inputs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pair = data.pairs[i];
    auto tit = data.tweet_text.find(pair.tweet_id);
    if (tit == data.tweet_text.end())
      throw FormatError("train: split references unknown tweet " +
                        pair.tweet_id);
    auto ait = data.articles.find(pair.article_url);
    if (ait == data.articles.end())
      throw FormatError("train: split references unknown article " +
                        pair.article_url);
    tweet_inputs[i] =
        make_tweet_input(model.vocab, normalize(tit->second, norm));
    article_inputs[i] = make_article_input(model, ait->second, norm);
    truncate_pair(tweet_inputs[i], article_inputs[i], cfg.max_seq);
  }

  std::vector<double> y_r(n);
  for (std::size_t i = 0; i < n; ++i) y_r[i] = data.pairs[i].label;

  const std::size_t h = model.cfg.hidden_dim;
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t eval_every =
      std::max<std::size_t>(1, std::min(cfg.eval_every, steps_per_epoch));
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;
  const std::size_t warmup_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(cfg.warmup_fraction * static_cast<double>(total_steps))));

  TrainResult result;
  double tau = cfg.tau_init;
  Rng rng(cfg.seed);
  AdamState opt(model);
  Grads grads(model);

  Checkpoint checkpoint{model, tau};
  if (dev) {
    result.best_dev_map5 = dev_map5(model, *dev, norm);
    result.best_step = 0;
  }

  std::size_t step = 0;
  bool failed = false;
  for (std::size_t epoch = 1; epoch <= cfg.epochs && !failed; ++epoch) {
    Matrix tweet_emb(n, h);
    for (std::size_t i = 0; i < n; ++i) {
      auto vec = encode(model, tweet_inputs[i]);
      std::copy(vec.begin(), vec.end(), tweet_emb.row(i).begin());
    }
    std::vector<std::size_t> order =
        group_shuffle(tweet_emb, cfg.group_size, rng);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t end = std::min(n, start + cfg.batch_size);
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
    }

    double epoch_loss = 0.0;
    for (const auto& batch : batches) {
      ++step;
      const std::size_t m = batch.size();
      try {
        std::vector<EncodeTrace> c_traces(m), v_traces(m);
        Matrix c(m, h), v(m, h);
        std::vector<double> labels(m);
        for (std::size_t b = 0; b < m; ++b) {
          c_traces[b] = encode_with_trace(model, tweet_inputs[batch[b]]);
          v_traces[b] = encode_with_trace(model, article_inputs[batch[b]]);
          std::copy(c_traces[b].unit.begin(), c_traces[b].unit.end(),
                    c.row(b).begin());
          std::copy(v_traces[b].unit.begin(), v_traces[b].unit.end(),
                    v.row(b).begin());
          labels[b] = y_r[batch[b]];
        }
        MnrResult res = mnr_loss(c, v, labels, tau, cfg.weighted);
        epoch_loss += res.loss;

        grads.zero();
        for (std::size_t b = 0; b < m; ++b) {
          backprop_unit(model, c_traces[b], res.grad_c.row(b), grads);
          backprop_unit(model, v_traces[b], res.grad_v.row(b), grads);
        }

        const double warm =
            std::min(1.0, static_cast<double>(step) /
                              static_cast<double>(warmup_steps));
        const double lr = cfg.lr * warm;
        const double tau_lr = cfg.tau_lr * warm;
        ++opt.t;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t));
        adam_array(model.embeddings.data, grads.embeddings.data,
                   opt.m_emb.data, opt.v_emb.data, lr, cfg.weight_decay, cfg,
                   bc1, bc2);
        adam_array(model.projection.data, grads.projection.data,
                   opt.m_proj.data, opt.v_proj.data, lr, cfg.weight_decay, cfg,
                   bc1, bc2);
        adam_array(model.bias, grads.bias, opt.m_bias, opt.v_bias, lr,
                   cfg.weight_decay, cfg, bc1, bc2);
        {
          std::span<double> tau_s(&tau, 1);
          std::span<const double> g_s(&res.grad_tau, 1);
          std::span<double> m_s(&opt.m_tau, 1), v_s(&opt.v_tau, 1);
          adam_array(tau_s, g_s, m_s, v_s, tau_lr, 0.0, cfg, bc1, bc2);
        }
        tau = std::max(tau, cfg.tau_min);

        if (!all_finite(model.embeddings.data) ||
            !all_finite(model.projection.data) || !all_finite(model.bias) ||
            !std::isfinite(tau))
          throw NumericalError("train: non-finite parameters after update");
      } catch (const NumericalError&) {
        failed = true;
        break;
      }

      if (dev && step % eval_every == 0) {
        double map5 = dev_map5(model, *dev, norm);
        if (map5 > result.best_dev_map5) {
          result.best_dev_map5 = map5;
          result.best_step = step;
          checkpoint = {model, tau};
        }
      }
    }
    if (failed) break;
    result.epoch_losses.push_back(epoch_loss /
                                  static_cast<double>(batches.size()));

    if (epoch >= cfg.refurbish_start) {
      for (const auto& batch : batches) {
        const std::size_t m = batch.size();
        Matrix c(m, h), v(m, h);
        std::vector<double> labels(m);
        for (std::size_t b = 0; b < m; ++b) {
          auto cv = encode(model, tweet_inputs[batch[b]]);
          auto vv = encode(model, article_inputs[batch[b]]);
          std::copy(cv.begin(), cv.end(), c.row(b).begin());
          std::copy(vv.begin(), vv.end(), v.row(b).begin());
          labels[b] = y_r[batch[b]];
        }
        auto y_hat = model_prediction(c, v, tau, cfg.prediction);
        auto updated = refurbish(labels, y_hat, cfg.alpha);
        for (std::size_t b = 0; b < m; ++b) y_r[batch[b]] = updated[b];
      }
    }
    if (!dev) checkpoint = {model, tau};
  }

  if (dev && !failed) {
    double map5 = dev_map5(model, *dev, norm);
    if (map5 > result.best_dev_map5) {
      result.best_dev_map5 = map5;
      result.best_step = step;
      checkpoint = {model, tau};
    }
  }
  if (!dev && !failed) checkpoint = {model, tau};

  result.model = std::move(checkpoint.model);
  result.tau = checkpoint.tau;
  result.labels = std::move(y_r);
  result.steps = step;
  result.aborted = failed;
  return result;
}

}  // namespace claimmatch
