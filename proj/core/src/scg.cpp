#include "biorec/scg.hpp"

#include <cmath>

#include "biorec/error.hpp"

namespace biorec {

namespace {
constexpr double kLambdaMax = 1e100;
}

ScaledConjugateGradient::ScaledConjugateGradient(Objective objective, Vector initial,
                                                 ScgOptions options)
    : objective_(std::move(objective)), options_(options), w_(std::move(initial)) {
  Vector g(w_.size());
  loss_ = objective_(w_, &g);
  if (!std::isfinite(loss_) || !g.allFinite())
    throw TrainingDivergence("objective is not finite at the initial point");
  r_ = -g;
  p_ = r_;
  lambda_ = options_.lambda_init;
  restart_interval_ = options_.restart_interval > 0 ? options_.restart_interval : w_.size();
}

void ScaledConjugateGradient::restart() {
  p_ = r_;
  lambda_ = options_.lambda_init;
  lambda_bar_ = 0;
  success_ = true;
}

ScgStep ScaledConjugateGradient::step() {
  ++k_;
  if (r_.squaredNorm() == 0.0) return {false, loss_, 0.0};

  if (success_) {
    p_norm2_ = p_.squaredNorm();
    const double sigma_k = options_.sigma / std::sqrt(p_norm2_);
    Vector g_plus(w_.size());
    objective_(w_ + sigma_k * p_, &g_plus);
    const Vector s = (g_plus + r_) / sigma_k;  // (E'(w + sigma p) - E'(w)) / sigma
    delta_ = p_.dot(s);
  }

  delta_ += (lambda_ - lambda_bar_) * p_norm2_;
  if (delta_ <= 0) {
    lambda_bar_ = 2.0 * (lambda_ - delta_ / p_norm2_);
    delta_ = -delta_ + lambda_ * p_norm2_;
    lambda_ = lambda_bar_;
  }

  const double mu = p_.dot(r_);
  const double alpha = mu / delta_;
  Vector w_trial = w_ + alpha * p_;
  Vector g_trial(w_.size());
  const double trial_loss = objective_(w_trial, &g_trial);

  if (!std::isfinite(trial_loss) || !g_trial.allFinite() || !std::isfinite(alpha)) {
    if (diverged_once_) throw TrainingDivergence("non-finite loss during scaled conjugate gradient");
    diverged_once_ = true;
    restart();
    return {false, loss_, -INFINITY};
  }

  const double comparison = 2.0 * delta_ * (loss_ - trial_loss) / (mu * mu);
  ScgStep result{false, loss_, comparison};
  const double p_norm2_k = p_norm2_;

  if (comparison >= 0) {
    const Vector r_new = -g_trial;
    w_ = std::move(w_trial);
    loss_ = trial_loss;
    lambda_bar_ = 0;
    success_ = true;
    if (k_ % restart_interval_ == 0) {
      p_ = r_new;
    } else {
      const double beta = (r_new.squaredNorm() - r_new.dot(r_)) / mu;
      p_ = r_new + beta * p_;
    }
    r_ = r_new;
    if (comparison > 0.75) lambda_ *= 0.5;
    result = {true, loss_, comparison};
  } else {
    lambda_bar_ = lambda_;
    success_ = false;
  }

  if (comparison < 0.25) lambda_ = std::min(lambda_ + delta_ * (1.0 - comparison) / p_norm2_k, kLambdaMax);

  // A non-descent direction can only come from round-off; fall back to steepest descent.
  if (p_.dot(r_) <= 0) {
    p_ = r_;
    lambda_bar_ = 0;
    success_ = true;
  }
  return result;
}

}  // namespace biorec
