#pragma once

#include "biorec/image.hpp"

namespace biorec {

enum class PcaRoute { automatic, gram, covariance };

/// Leading principal axes of a (optionally standardized) feature matrix.
struct PcaModel {
  Vector mean;                ///< d
  Vector scale;               ///< d; per-dimension population std, 0 marks a constant dimension
  Eigen::MatrixXd basis;      ///< d x N, orthonormal columns
  Vector eigenvalues;         ///< N, descending
  bool standardized = false;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index num_components() const { return basis.cols(); }

  /// Copy keeping only the first `n` components.
  PcaModel truncated(Eigen::Index n) const;
};

/// Fits PCA on `data` (d x n, one sample per column).
///
/// Standardization divides each centred dimension by its population std;
/// dimensions with std < 1e-12 contribute 0. The Gram route (n x n
/// eigenproblem, mapped back to d-space) is used when n <= d under
/// `automatic`. Eigenvalues below 1e-10 * lambda_max count as rank
/// deficiency and the component count is clamped to the rank. Each axis is
/// signed so its largest-magnitude entry is positive. `skip_leading` drops
/// that many leading axes before keeping `n_components`.
PcaModel fit_pca(const FeatureMatrix& data, Eigen::Index n_components, bool standardize,
                 PcaRoute route = PcaRoute::automatic, Eigen::Index skip_leading = 0);

/// Numerical rank of the (standardized) covariance used by fit_pca.
Eigen::Index pca_rank(const FeatureMatrix& data, bool standardize);

/// Centred and (if fitted so) scaled input, the coordinates the basis acts on.
Vector standardize_input(const PcaModel& model, const Vector& x);

Vector project(const PcaModel& model, const Vector& x);
/// Column-wise projection of a d x m matrix.
Eigen::MatrixXd project(const PcaModel& model, const FeatureMatrix& x);

}  // namespace biorec
