#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hwfl {

/// Classifier shape. hidden_dim == 0 selects multinomial logistic
/// regression; otherwise a one-hidden-layer tanh MLP.
///
/// Parameter layout (row-major, concatenated):
///   linear: W[c x d], b[c]
///   mlp:    W1[h x d], b1[h], W2[c x h], b2[c]
struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t n_classes = 0;

  std::size_t param_count() const;
  void validate() const;

  bool operator==(const ModelShape&) const = default;
};

struct ModelParams {
  ModelShape shape;
  std::vector<double> values;

  /// Length matches the shape and every entry is finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// One client's samples; features are row-major n_samples x input_dim.
struct LocalDataset {
  int client_id = 0;
  std::size_t input_dim = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
  void push_back(std::span<const double> x, int label);

  /// Checks shapes, label range and (unless allow_empty) n_samples >= 1.
  void validate(bool allow_empty = false) const;

  bool operator==(const LocalDataset&) const = default;
};

struct TrainSpec {
  int epochs = 1;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  double prox_mu = 0.0;  // 0 disables the proximal term
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

struct TrainResult {
  ModelParams params;
  double final_loss = 0.0;  // full local objective after the last epoch
  std::size_t n_samples = 0;
};

struct EvalMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double balanced_accuracy = 0.0;
};

/// Weights uniform in +-0.01 for the linear model; Glorot-uniform for the
/// MLP layers. Biases start at zero.
ModelParams init_model(const ModelShape& shape, std::uint64_t seed);

std::vector<double> logits(const ModelParams& params,
                           std::span<const double> x);

int predict(const ModelParams& params, std::span<const double> x);

/// Mean cross-entropy over `data`, plus (prox_mu / 2) * ||params - ref||^2
/// when prox_mu > 0, with the exact gradient. prox_mu > 0 needs global_ref.
LossGrad loss_and_grad(const ModelParams& params, const LocalDataset& data,
                       const ModelParams* global_ref, double prox_mu);

/// spec.epochs passes of mini-batch SGD, reshuffling each epoch from
/// (spec.seed, epoch). When spec.prox_mu > 0 the proximal anchor is
/// `start`. Never mutates `start`.
TrainResult local_train(const ModelParams& start, const LocalDataset& data,
                        const TrainSpec& spec);

/// Accuracy, macro-F1 over all n_classes (a class absent from both labels
/// and predictions scores F1 = 0) and balanced accuracy over classes that
/// appear in the labels.
EvalMetrics score_predictions(std::span<const int> labels,
                              std::span<const int> predictions,
                              std::size_t n_classes);

EvalMetrics evaluate(const ModelParams& params, const LocalDataset& data);

}  // namespace hwfl
