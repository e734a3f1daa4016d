#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biorec/image.hpp"
#include "biorec/scg.hpp"

namespace biorec {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class HiddenActivation { tanh, identity };

/// `linear_squared_error` (identity outputs, 0.5 * squared error) exists for
/// optimizer tests against closed-form least squares.
enum class OutputLoss { softmax_cross_entropy, linear_squared_error };

/// One-hidden-layer perceptron: softmax(W2 * act(W1 * x + b1) + b2).
struct MlpModel {
  int n_in = 0;
  int n_hidden = 0;
  int n_out = 0;
  RowMatrix w1;  ///< n_hidden x n_in
  Vector b1;     ///< n_hidden
  RowMatrix w2;  ///< n_out x n_hidden
  Vector b2;     ///< n_out
  HiddenActivation activation = HiddenActivation::tanh;
  OutputLoss output = OutputLoss::softmax_cross_entropy;
  std::uint64_t seed = 0;

  /// n_hidden * (n_in + 1) + n_out * (n_hidden + 1)
  Eigen::Index parameter_count() const;

  /// Parameters in the order W1, b1, W2, b2 (matrices row-major).
  Vector flatten() const;
  void unflatten(const Vector& params);

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

inline Eigen::Index mlp_parameter_count(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out) {
  return n_hidden * (n_in + 1) + n_out * (n_hidden + 1);
}

/// Weights uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)), biases 0.
MlpModel init_weights(int n_in, int n_hidden, int n_out, std::uint64_t seed);

/// Pre-softmax outputs, n_out x batch; `x` is n_in x batch.
Eigen::MatrixXd logits(const MlpModel& model, const FeatureMatrix& x);

/// Output matrix, n_out x batch: class probabilities (columns sum to 1), or
/// the linear outputs for the squared-error test loss.
Eigen::MatrixXd forward(const MlpModel& model, const FeatureMatrix& x);

/// Column-wise softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& z);

/// n_out x labels.size() indicator matrix; throws on labels outside [0, n_out).
Eigen::MatrixXd one_hot(const std::vector<int>& labels, int n_out);

struct LossGradient {
  double loss = 0;
  Vector gradient;  ///< flatten() order
};

/// Mean loss over the batch and its gradient. `w1_mask`, when given, zeroes
/// the gradient of masked-out W1 entries (0 = no connection).
LossGradient loss_and_gradient(const MlpModel& model, const FeatureMatrix& x,
                               const Eigen::MatrixXd& targets,
                               const RowMatrix* w1_mask = nullptr);
double loss_only(const MlpModel& model, const FeatureMatrix& x, const Eigen::MatrixXd& targets);

/// Argmax per column, lowest index on ties.
std::vector<int> argmax_columns(const Eigen::MatrixXd& scores);

double misclassification_rate(const Eigen::MatrixXd& scores, const std::vector<int>& labels);

enum class StopReason { val_rise, max_epochs, grad_tol };
std::string to_string(StopReason r);

struct TrainOptions {
  int max_epochs = 1000;
  int patience = 5;
  double grad_tol = 1e-8;
  ScgOptions scg;
};

/// Per-epoch record; index 0 is the initial model.
struct TrainReport {
  int epochs_run = 0;
  std::vector<double> train_loss_history;
  std::vector<double> val_error_history;
  std::vector<double> val_loss_history;
  int best_epoch = 0;
  StopReason stop_reason = StopReason::max_epochs;

  std::string to_text() const;
};

struct LabeledData {
  FeatureMatrix x;  ///< one sample per column
  std::vector<int> labels;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Full-batch SCG on `learn` with early stopping on `val`.
///
/// After every SCG iteration the validation misclassification rate is
/// recorded. An epoch improves on the best so far when its error is lower,
/// or equal with a lower validation loss. Training stops after `patience`
/// epochs without improvement, at max_epochs, or when the gradient norm
/// drops below grad_tol; the best snapshot is returned.
TrainResult scg_train(const MlpModel& initial, const LabeledData& learn, const LabeledData& val,
                      const TrainOptions& options, const RowMatrix* w1_mask = nullptr);

}  // namespace biorec
