#pragma once

// Straightforward reference computations used to check the optimized code.

#include <cstdint>
#include <vector>

#include "biorec/image.hpp"
#include "biorec/mlp.hpp"

namespace biorec::oracle {

/// Per-pixel LBP histogram: explicit trigonometry, interpolation along x then y.
Vector lbp_histogram(const Image& image, int points, int radius, int grid_y, int grid_x);

/// Uniform codes (at most two circular transitions) for P bits, ascending.
std::vector<std::uint32_t> uniform_codes(int points);

/// Per-cell HOG with explicit neighbour clamping and block assembly.
Vector hog(const Image& image, int cell_y, int cell_x);

struct EigenPairs {
  Vector values;           ///< descending
  Eigen::MatrixXd vectors; ///< columns
};

/// Cyclic Jacobi rotations on a symmetric matrix.
EigenPairs jacobi_eigen(Eigen::MatrixXd a, double tol = 1e-14, int max_sweeps = 100);

/// Population covariance of d x n data (samples as columns), optionally of
/// the z-scored data with constant dimensions mapped to 0.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& data, bool standardize);

/// Central differences with h = 1e-6 * max(1, |theta|).
Vector finite_difference_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets);

/// Explicit loop forward pass: softmax(W2 tanh(W1 x + b1) + b2) for one sample.
std::vector<double> forward_one(const MlpModel& model, const std::vector<double>& x);

/// Pairwise-comparison AUC (ties count one half).
double mann_whitney_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

struct MeanStd {
  double mean = 0;
  double std = 0;
};
MeanStd mean_pstd(const std::vector<double>& values);

}  // namespace biorec::oracle
