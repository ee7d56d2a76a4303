#include "hwfl/local_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hwfl/error.hpp"
#include "hwfl/rng.hpp"

namespace hwfl {
namespace {

struct Forward {
  std::vector<double> hidden;  // tanh activations (MLP only)
  std::vector<double> logits;
  std::vector<double> probs;   // softmax output
  double log_norm = 0.0;       // log-sum-exp of the logits
};

void hidden_layer(const ModelParams& p, std::span<const double> x,
                  std::vector<double>& h) {
  const auto d = p.shape.input_dim, hd = p.shape.hidden_dim;
  const double* w1 = p.values.data();
  const double* b1 = w1 + hd * d;
  h.assign(hd, 0.0);
  for (std::size_t j = 0; j < hd; ++j) {
    double z = b1[j];
    const double* wj = w1 + j * d;
    for (std::size_t i = 0; i < d; ++i) z += wj[i] * x[i];
    h[j] = std::tanh(z);
  }
}

void output_layer(const ModelParams& p, std::span<const double> in,
                  std::vector<double>& z) {
  const auto c = p.shape.n_classes;
  const std::size_t m = in.size();
  const double* w = p.values.data();
  if (p.shape.hidden_dim > 0) {
    const auto d = p.shape.input_dim, hd = p.shape.hidden_dim;
    w += hd * d + hd;
  }
  const double* b = w + c * m;
  z.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    double s = b[k];
    const double* wk = w + k * m;
    for (std::size_t i = 0; i < m; ++i) s += wk[i] * in[i];
    z[k] = s;
  }
}

void forward(const ModelParams& p, std::span<const double> x, Forward& f) {
  if (p.shape.hidden_dim > 0) {
    hidden_layer(p, x, f.hidden);
    output_layer(p, f.hidden, f.logits);
  } else {
    output_layer(p, x, f.logits);
  }
  const double zmax = *std::max_element(f.logits.begin(), f.logits.end());
  f.probs.resize(f.logits.size());
  double denom = 0.0;
  for (std::size_t k = 0; k < f.logits.size(); ++k) {
    f.probs[k] = std::exp(f.logits[k] - zmax);
    denom += f.probs[k];
  }
  for (double& v : f.probs) v /= denom;
  f.log_norm = zmax + std::log(denom);
}

void check_compatible(const ModelParams& p, const LocalDataset& data) {
  if (data.input_dim != p.shape.input_dim) {
    std::ostringstream msg;
    msg << "shape mismatch: model expects input_dim " << p.shape.input_dim
        << ", dataset has " << data.input_dim;
    throw ValidationError(msg.str());
  }
  if (data.n_classes > p.shape.n_classes) {
    std::ostringstream msg;
    msg << "shape mismatch: dataset has " << data.n_classes
        << " classes, model has " << p.shape.n_classes;
    throw ValidationError(msg.str());
  }
}

// Mean cross-entropy over the indexed samples plus the proximal term.
// Sums run in index order so a batch gives the same bits as the same
// samples packed into their own dataset.
LossGrad batch_loss_grad(const ModelParams& p, const LocalDataset& data,
                         std::span<const std::size_t> idx,
                         const ModelParams* ref, double mu) {
  const auto d = p.shape.input_dim, hd = p.shape.hidden_dim,
             c = p.shape.n_classes;
  LossGrad out;
  out.grad.assign(p.values.size(), 0.0);
  Forward f;
  std::vector<double> dh;
  double loss_sum = 0.0;

  for (std::size_t n : idx) {
    const auto x = data.row(n);
    const int y = data.labels[n];
    forward(p, x, f);
    loss_sum += f.log_norm - f.logits[static_cast<std::size_t>(y)];
    f.probs[static_cast<std::size_t>(y)] -= 1.0;  // now dL/dz
    const auto& delta = f.probs;

    if (hd == 0) {
      double* gw = out.grad.data();
      double* gb = gw + c * d;
      for (std::size_t k = 0; k < c; ++k) {
        gb[k] += delta[k];
        double* gwk = gw + k * d;
        for (std::size_t i = 0; i < d; ++i) gwk[i] += delta[k] * x[i];
      }
    } else {
      double* gw1 = out.grad.data();
      double* gb1 = gw1 + hd * d;
      double* gw2 = gb1 + hd;
      double* gb2 = gw2 + c * hd;
      const double* w2 = p.values.data() + hd * d + hd;
      dh.assign(hd, 0.0);
      for (std::size_t k = 0; k < c; ++k) {
        gb2[k] += delta[k];
        double* gw2k = gw2 + k * hd;
        const double* w2k = w2 + k * hd;
        for (std::size_t j = 0; j < hd; ++j) {
          gw2k[j] += delta[k] * f.hidden[j];
          dh[j] += w2k[j] * delta[k];
        }
      }
      for (std::size_t j = 0; j < hd; ++j) {
        const double dz = dh[j] * (1.0 - f.hidden[j] * f.hidden[j]);
        gb1[j] += dz;
        double* gw1j = gw1 + j * d;
        for (std::size_t i = 0; i < d; ++i) gw1j[i] += dz * x[i];
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(idx.size());
  out.loss = loss_sum * inv_n;
  for (double& g : out.grad) g *= inv_n;

  if (mu > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      const double diff = p.values[i] - ref->values[i];
      sq += diff * diff;
      out.grad[i] += mu * diff;
    }
    out.loss += 0.5 * mu * sq;
  }
  return out;
}

}  // namespace

std::size_t ModelShape::param_count() const {
  if (hidden_dim == 0) return n_classes * input_dim + n_classes;
  return hidden_dim * input_dim + hidden_dim + n_classes * hidden_dim +
         n_classes;
}

void ModelShape::validate() const {
  if (input_dim == 0 || n_classes == 0)
    throw ValidationError("model shape: input_dim and n_classes must be > 0");
}

void ModelParams::validate() const {
  shape.validate();
  if (values.size() != shape.param_count()) {
    std::ostringstream msg;
    msg << "model params: expected " << shape.param_count()
        << " values, got " << values.size();
    throw ValidationError(msg.str());
  }
  for (double v : values) {
    if (!std::isfinite(v))
      throw ValidationError("model params: non-finite entry");
  }
}

void LocalDataset::push_back(std::span<const double> x, int label) {
  if (x.size() != input_dim)
    throw ValidationError("dataset row has wrong feature count");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

void LocalDataset::validate(bool allow_empty) const {
  if (input_dim == 0 || n_classes == 0)
    throw ValidationError("dataset: input_dim and n_classes must be > 0");
  if (!allow_empty && labels.empty())
    throw ValidationError("dataset for client " + std::to_string(client_id) +
                          " is empty");
  if (features.size() != labels.size() * input_dim)
    throw ValidationError("dataset: feature matrix does not match labels");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw ValidationError("dataset: label out of range");
  }
}

void TrainSpec::validate() const {
  if (epochs < 1) throw ValidationError("train spec: epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("train spec: learning_rate must be >= 0");
  if (batch_size < 1)
    throw ValidationError("train spec: batch_size must be >= 1");
  if (!(prox_mu >= 0.0))
    throw ValidationError("train spec: prox_mu must be >= 0");
}

ModelParams init_model(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  ModelParams p{shape, std::vector<double>(shape.param_count(), 0.0)};
  Rng rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, double limit) {
    for (std::size_t i = 0; i < count; ++i)
      p.values[offset + i] = limit * (2.0 * rng.uniform() - 1.0);
  };
  const auto d = shape.input_dim, hd = shape.hidden_dim, c = shape.n_classes;
  if (hd == 0) {
    fill(0, c * d, 0.01);
  } else {
    fill(0, hd * d, std::sqrt(6.0 / static_cast<double>(d + hd)));
    fill(hd * d + hd, c * hd, std::sqrt(6.0 / static_cast<double>(hd + c)));
  }
  return p;
}

std::vector<double> logits(const ModelParams& params,
                           std::span<const double> x) {
  std::vector<double> z;
  if (params.shape.hidden_dim > 0) {
    std::vector<double> h;
    hidden_layer(params, x, h);
    output_layer(params, h, z);
  } else {
    output_layer(params, x, z);
  }
  return z;
}

int predict(const ModelParams& params, std::span<const double> x) {
  const auto z = logits(params, x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

LossGrad loss_and_grad(const ModelParams& params, const LocalDataset& data,
                       const ModelParams* global_ref, double prox_mu) {
  params.validate();
  data.validate();
  check_compatible(params, data);
  if (prox_mu < 0.0) throw ValidationError("prox_mu must be >= 0");
  if (prox_mu > 0.0) {
    if (global_ref == nullptr)
      throw ValidationError("prox_mu > 0 requires a global reference model");
    if (global_ref->shape != params.shape)
      throw ValidationError("shape mismatch between params and global_ref");
  }
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return batch_loss_grad(params, data, idx, global_ref, prox_mu);
}

TrainResult local_train(const ModelParams& start, const LocalDataset& data,
                        const TrainSpec& spec) {
  spec.validate();
  start.validate();
  data.validate();
  check_compatible(start, data);

  TrainResult result{start, 0.0, data.size()};
  auto& w = result.params.values;
  const ModelParams* anchor = spec.prox_mu > 0.0 ? &start : nullptr;
  std::vector<std::size_t> order(data.size());

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed({spec.seed, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);

    for (std::size_t begin = 0; begin < order.size();
         begin += spec.batch_size) {
      const std::size_t end = std::min(order.size(), begin + spec.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin,
                                               end - begin);
      const auto lg =
          batch_loss_grad(result.params, data, batch, anchor, spec.prox_mu);
      for (std::size_t j = 0; j < w.size(); ++j)
        w[j] -= spec.learning_rate * lg.grad[j];
    }
  }

  std::iota(order.begin(), order.end(), 0);
  result.final_loss =
      batch_loss_grad(result.params, data, order, anchor, spec.prox_mu).loss;
  return result;
}

EvalMetrics score_predictions(std::span<const int> labels,
                              std::span<const int> predictions,
                              std::size_t n_classes) {
  if (labels.empty()) throw ValidationError("evaluate: empty data");
  if (labels.size() != predictions.size())
    throw ValidationError("evaluate: labels and predictions differ in length");
  std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0),
      fn(n_classes, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const auto q = static_cast<std::size_t>(predictions[i]);
    if (y >= n_classes || q >= n_classes)
      throw ValidationError("evaluate: class index out of range");
    if (y == q) {
      tp[y] += 1.0;
      correct += 1.0;
    } else {
      fp[q] += 1.0;
      fn[y] += 1.0;
    }
  }
  EvalMetrics m;
  m.accuracy = correct / static_cast<double>(labels.size());
  double f1_sum = 0.0, recall_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    const double denom = 2.0 * tp[k] + fp[k] + fn[k];
    f1_sum += denom > 0.0 ? 2.0 * tp[k] / denom : 0.0;
    if (tp[k] + fn[k] > 0.0) {
      recall_sum += tp[k] / (tp[k] + fn[k]);
      ++present;
    }
  }
  m.macro_f1 = f1_sum / static_cast<double>(n_classes);
  m.balanced_accuracy = recall_sum / static_cast<double>(present);
  return m;
}

EvalMetrics evaluate(const ModelParams& params, const LocalDataset& data) {
  params.validate();
  data.validate();
  check_compatible(params, data);
  std::vector<int> preds;
  preds.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    preds.push_back(predict(params, data.row(i)));
  return score_predictions(data.labels, preds, params.shape.n_classes);
}

}  // namespace hwfl
