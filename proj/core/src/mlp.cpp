#include "biorec/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/random.hpp"

namespace biorec {

Eigen::Index MlpModel::parameter_count() const {
  return mlp_parameter_count(n_in, n_hidden, n_out);
}

Vector MlpModel::flatten() const {
  Vector out(parameter_count());
  Eigen::Index k = 0;
  out.segment(k, w1.size()) = Eigen::Map<const Vector>(w1.data(), w1.size());
  k += w1.size();
  out.segment(k, b1.size()) = b1;
  k += b1.size();
  out.segment(k, w2.size()) = Eigen::Map<const Vector>(w2.data(), w2.size());
  k += w2.size();
  out.segment(k, b2.size()) = b2;
  return out;
}

void MlpModel::unflatten(const Vector& params) {
  if (params.size() != parameter_count())
    throw InvalidArgument(fmt::format("expected {} parameters, got {}", parameter_count(), params.size()));
  w1.resize(n_hidden, n_in);
  w2.resize(n_out, n_hidden);
  Eigen::Index k = 0;
  Eigen::Map<Vector>(w1.data(), w1.size()) = params.segment(k, w1.size());
  k += w1.size();
  b1 = params.segment(k, n_hidden);
  k += n_hidden;
  Eigen::Map<Vector>(w2.data(), w2.size()) = params.segment(k, w2.size());
  k += w2.size();
  b2 = params.segment(k, n_out);
}

MlpModel init_weights(int n_in, int n_hidden, int n_out, std::uint64_t seed) {
  if (n_in < 1 || n_hidden < 1 || n_out < 1)
    throw InvalidArgument(fmt::format("MLP sizes must be >= 1, got {}-{}-{}", n_in, n_hidden, n_out));
  MlpModel m;
  m.n_in = n_in;
  m.n_hidden = n_hidden;
  m.n_out = n_out;
  m.seed = seed;
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / (n_in + n_hidden));
  const double r2 = std::sqrt(6.0 / (n_hidden + n_out));
  m.w1.resize(n_hidden, n_in);
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-r1, r1);
  m.b1 = Vector::Zero(n_hidden);
  m.w2.resize(n_out, n_hidden);
  for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = rng.uniform(-r2, r2);
  m.b2 = Vector::Zero(n_out);
  return m;
}

namespace {

void check_input(const MlpModel& model, const FeatureMatrix& x) {
  if (x.rows() != model.n_in)
    throw InvalidArgument(fmt::format("MLP expects {} inputs, got {}", model.n_in, x.rows()));
}

Eigen::MatrixXd hidden_layer(const MlpModel& model, const FeatureMatrix& x) {
  Eigen::MatrixXd z = model.w1 * x;
  z.colwise() += model.b1;
  if (model.activation == HiddenActivation::tanh) z = z.array().tanh();
  return z;
}

Eigen::MatrixXd output_layer(const MlpModel& model, const Eigen::MatrixXd& hidden) {
  Eigen::MatrixXd z = model.w2 * hidden;
  z.colwise() += model.b2;
  return z;
}

double mean_loss(const MlpModel& model, const Eigen::MatrixXd& z, const Eigen::MatrixXd& targets) {
  const auto m = static_cast<double>(z.cols());
  if (model.output == OutputLoss::linear_squared_error)
    return 0.5 * (z - targets).squaredNorm() / m;
  double total = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double top = z.col(j).maxCoeff();
    const double lse = top + std::log((z.col(j).array() - top).exp().sum());
    total += (targets.col(j).array() * (lse - z.col(j).array())).sum();
  }
  return total / m;
}

void check_targets(const MlpModel& model, const FeatureMatrix& x, const Eigen::MatrixXd& targets) {
  check_input(model, x);
  if (x.cols() == 0) throw InvalidArgument("empty batch");
  if (targets.rows() != model.n_out || targets.cols() != x.cols())
    throw InvalidArgument("target matrix shape does not match outputs");
}

}  // namespace

Eigen::MatrixXd softmax(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double top = z.col(j).maxCoeff();
    p.col(j) = (z.col(j).array() - top).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

Eigen::MatrixXd logits(const MlpModel& model, const FeatureMatrix& x) {
  check_input(model, x);
  return output_layer(model, hidden_layer(model, x));
}

Eigen::MatrixXd forward(const MlpModel& model, const FeatureMatrix& x) {
  Eigen::MatrixXd z = logits(model, x);
  if (model.output == OutputLoss::linear_squared_error) return z;
  return softmax(z);
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int n_out) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_out, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] < 0 || labels[j] >= n_out)
      throw InvalidArgument(fmt::format("label {} outside [0, {})", labels[j], n_out));
    y(labels[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return y;
}

LossGradient loss_and_gradient(const MlpModel& model, const FeatureMatrix& x,
                               const Eigen::MatrixXd& targets, const RowMatrix* w1_mask) {
  check_targets(model, x, targets);
  const auto m = static_cast<double>(x.cols());
  const Eigen::MatrixXd h = hidden_layer(model, x);
  const Eigen::MatrixXd z = output_layer(model, h);

  LossGradient out;
  out.loss = mean_loss(model, z, targets);

  Eigen::MatrixXd dz = model.output == OutputLoss::linear_squared_error ? Eigen::MatrixXd(z - targets)
                                                                        : Eigen::MatrixXd(softmax(z) - targets);
  dz /= m;
  const RowMatrix dw2 = dz * h.transpose();
  const Vector db2 = dz.rowwise().sum();
  Eigen::MatrixXd dh = model.w2.transpose() * dz;
  if (model.activation == HiddenActivation::tanh) dh.array() *= 1.0 - h.array().square();
  RowMatrix dw1 = dh * x.transpose();
  if (w1_mask) dw1.array() *= w1_mask->array();
  const Vector db1 = dh.rowwise().sum();

  out.gradient.resize(model.parameter_count());
  Eigen::Index k = 0;
  out.gradient.segment(k, dw1.size()) = Eigen::Map<const Vector>(dw1.data(), dw1.size());
  k += dw1.size();
  out.gradient.segment(k, db1.size()) = db1;
  k += db1.size();
  out.gradient.segment(k, dw2.size()) = Eigen::Map<const Vector>(dw2.data(), dw2.size());
  k += dw2.size();
  out.gradient.segment(k, db2.size()) = db2;
  return out;
}

double loss_only(const MlpModel& model, const FeatureMatrix& x, const Eigen::MatrixXd& targets) {
  check_targets(model, x, targets);
  return mean_loss(model, output_layer(model, hidden_layer(model, x)), targets);
}

std::vector<int> argmax_columns(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.rows(); ++i)
      if (scores(i, j) > scores(best, j)) best = i;
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

double misclassification_rate(const Eigen::MatrixXd& scores, const std::vector<int>& labels) {
  const auto predicted = argmax_columns(scores);
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) wrong += predicted[j] != labels[j];
  return labels.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(labels.size());
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::val_rise: return "val_rise";
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::grad_tol: return "grad_tol";
  }
  return "max_epochs";
}

std::string TrainReport::to_text() const {
  std::string out = fmt::format("# epochs_run={} best_epoch={} stop_reason={}\nepoch\ttrain_loss\tval_error\tval_loss\n",
                                epochs_run, best_epoch, to_string(stop_reason));
  for (std::size_t e = 0; e < train_loss_history.size(); ++e)
    out += fmt::format("{}\t{:.17g}\t{:.17g}\t{:.17g}\n", e, train_loss_history[e], val_error_history[e],
                       val_loss_history[e]);
  return out;
}

TrainResult scg_train(const MlpModel& initial, const LabeledData& learn, const LabeledData& val,
                      const TrainOptions& options, const RowMatrix* w1_mask) {
  if (learn.labels.empty() || val.labels.empty())
    throw InvalidArgument("training needs non-empty learn and validation sets");
  if (learn.x.cols() != static_cast<Eigen::Index>(learn.labels.size()) ||
      val.x.cols() != static_cast<Eigen::Index>(val.labels.size()))
    throw InvalidArgument("feature/label count mismatch");
  if (options.max_epochs < 0 || options.patience < 1)
    throw InvalidArgument("max_epochs must be >= 0 and patience >= 1");

  const Eigen::MatrixXd learn_targets = one_hot(learn.labels, initial.n_out);
  const Eigen::MatrixXd val_targets = one_hot(val.labels, initial.n_out);

  MlpModel work = initial;
  Objective objective = [&](const Vector& w, Vector* grad) {
    work.unflatten(w);
    if (!grad) return loss_only(work, learn.x, learn_targets);
    auto lg = loss_and_gradient(work, learn.x, learn_targets, w1_mask);
    *grad = std::move(lg.gradient);
    return lg.loss;
  };

  TrainResult result{initial, {}};
  TrainReport& report = result.report;
  auto record = [&](const MlpModel& model, double train_loss) {
    const Eigen::MatrixXd val_out = forward(model, val.x);
    report.train_loss_history.push_back(train_loss);
    report.val_error_history.push_back(misclassification_rate(val_out, val.labels));
    report.val_loss_history.push_back(loss_only(model, val.x, val_targets));
  };

  ScaledConjugateGradient scg(objective, initial.flatten(), options.scg);
  record(initial, scg.loss());
  Vector best_params = initial.flatten();
  int since_best = 0;
  report.stop_reason = StopReason::max_epochs;

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    if (scg.gradient_norm() < options.grad_tol) {
      report.stop_reason = StopReason::grad_tol;
      break;
    }
    scg.step();
    work.unflatten(scg.weights());
    record(work, scg.loss());
    report.epochs_run = epoch;

    const auto e = static_cast<std::size_t>(epoch);
    const auto b = static_cast<std::size_t>(report.best_epoch);
    const bool improved =
        report.val_error_history[e] < report.val_error_history[b] ||
        (report.val_error_history[e] == report.val_error_history[b] &&
         report.val_loss_history[e] < report.val_loss_history[b]);
    if (improved) {
      report.best_epoch = epoch;
      best_params = scg.weights();
      since_best = 0;
    } else if (++since_best >= options.patience) {
      report.stop_reason = StopReason::val_rise;
      break;
    }
  }

  result.model.unflatten(best_params);
  return result;
}

}  // namespace biorec
