#pragma once

#include <Eigen/Dense>

namespace biorec {

/// Grayscale image, H rows by W columns, intensities as doubles.
using Image = Eigen::MatrixXd;

/// Dense feature matrix, one sample per column.
using FeatureMatrix = Eigen::MatrixXd;

using Vector = Eigen::VectorXd;

}  // namespace biorec
