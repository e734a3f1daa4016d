#pragma once

#include <cstdint>
#include <functional>

#include "biorec/image.hpp"

namespace biorec {

/// Returns E(w); writes dE/dw into `gradient` when it is non-null.
using Objective = std::function<double(const Vector& w, Vector* gradient)>;

struct ScgOptions {
  double sigma = 5e-5;        ///< finite-difference step for the Hessian-vector product
  double lambda_init = 5e-7;  ///< initial scale (Levenberg-Marquardt) parameter
  /// Direction reset to steepest descent every this many iterations; 0 means
  /// the number of parameters.
  std::int64_t restart_interval = 0;
};

struct ScgStep {
  bool accepted = false;
  double loss = 0;        ///< E(w) after the step
  double comparison = 0;  ///< reduction ratio Delta
};

/// Møller's scaled conjugate gradient, one iteration per step().
///
/// No line search: the step length comes from a scaled second-order model
/// whose scale lambda is raised when the model is poor (Delta < 0.25) and
/// halved when it is good (Delta > 0.75). A non-finite trial loss resets
/// lambda and the direction once; a second one throws TrainingDivergence.
class ScaledConjugateGradient {
 public:
  ScaledConjugateGradient(Objective objective, Vector initial, ScgOptions options = {});

  ScgStep step();

  const Vector& weights() const { return w_; }
  double loss() const { return loss_; }
  double gradient_norm() const { return r_.norm(); }
  double lambda() const { return lambda_; }
  std::int64_t iterations() const { return k_; }

 private:
  void restart();

  Objective objective_;
  ScgOptions options_;
  Vector w_;
  Vector r_;  // -E'(w)
  Vector p_;  // search direction
  double loss_ = 0;
  double lambda_ = 0;
  double lambda_bar_ = 0;
  double delta_ = 0;
  double p_norm2_ = 0;
  bool success_ = true;
  bool diverged_once_ = false;
  std::int64_t k_ = 0;
  std::int64_t restart_interval_ = 0;
};

}  // namespace biorec
