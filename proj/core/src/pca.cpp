#include "biorec/pca.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "biorec/error.hpp"

namespace biorec {

namespace {

constexpr double kScaleFloor = 1e-12;
constexpr double kRankTolerance = 1e-10;

struct Prepared {
  Vector mean;
  Vector scale;
  Eigen::MatrixXd centred;  // d x n
};

Prepared prepare(const FeatureMatrix& data, bool standardize) {
  const auto n = static_cast<double>(data.cols());
  Prepared p;
  p.mean = data.rowwise().mean();
  p.centred = data.colwise() - p.mean;
  p.scale = Vector::Ones(data.rows());
  if (standardize) {
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      const double sd = std::sqrt(p.centred.row(j).squaredNorm() / n);
      if (sd < kScaleFloor) {
        p.scale[j] = 0.0;
        p.centred.row(j).setZero();
      } else {
        p.scale[j] = sd;
        p.centred.row(j) /= sd;
      }
    }
  }
  return p;
}

/// Eigenpairs of a symmetric matrix, descending.
void descending_eigen(const Eigen::MatrixXd& sym, Vector& values, Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw DataError("PCA eigen-decomposition failed");
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
}

Eigen::Index rank_of(const Vector& values) {
  if (values.size() == 0 || values[0] <= 0.0) return 0;
  const double cut = kRankTolerance * values[0];
  Eigen::Index r = 0;
  while (r < values.size() && values[r] > cut) ++r;
  return r;
}

void orient(Eigen::MatrixXd& basis) {
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    Eigen::Index arg;
    basis.col(k).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, k) < 0) basis.col(k) = -basis.col(k);
  }
}

}  // namespace

PcaModel PcaModel::truncated(Eigen::Index n) const {
  if (n < 0 || n > num_components())
    throw InvalidArgument(fmt::format("cannot keep {} of {} components", n, num_components()));
  PcaModel out = *this;
  out.basis = basis.leftCols(n);
  out.eigenvalues = eigenvalues.head(n);
  return out;
}

PcaModel fit_pca(const FeatureMatrix& data, Eigen::Index n_components, bool standardize,
                 PcaRoute route, Eigen::Index skip_leading) {
  if (data.cols() < 2) throw InvalidArgument("PCA needs at least 2 samples");
  if (n_components < 1) throw InvalidArgument("PCA needs at least 1 component");
  if (skip_leading < 0) throw InvalidArgument("skip_leading must be non-negative");
  if (!data.allFinite()) throw DataError("PCA input contains non-finite values");

  const auto d = data.rows();
  const auto n = data.cols();
  const Prepared p = prepare(data, standardize);
  if (route == PcaRoute::automatic) route = n <= d ? PcaRoute::gram : PcaRoute::covariance;

  Vector values;
  Eigen::MatrixXd vectors;
  if (route == PcaRoute::gram) {
    const Eigen::MatrixXd gram = p.centred.transpose() * p.centred / static_cast<double>(n);
    descending_eigen(gram, values, vectors);
  } else {
    const Eigen::MatrixXd cov = p.centred * p.centred.transpose() / static_cast<double>(n);
    descending_eigen(cov, values, vectors);
  }

  const Eigen::Index rank = rank_of(values);
  const Eigen::Index first = std::min(skip_leading, rank);
  const Eigen::Index keep = std::min(n_components, rank - first);

  PcaModel model;
  model.mean = p.mean;
  model.scale = p.scale;
  model.standardized = standardize;
  model.eigenvalues = values.segment(first, keep).cwiseMax(0.0);
  if (route == PcaRoute::gram) {
    model.basis = p.centred * vectors.middleCols(first, keep);
    for (Eigen::Index k = 0; k < keep; ++k) model.basis.col(k).normalize();
  } else {
    model.basis = vectors.middleCols(first, keep);
  }
  orient(model.basis);
  return model;
}

Eigen::Index pca_rank(const FeatureMatrix& data, bool standardize) {
  if (data.cols() < 2) return 0;
  const Prepared p = prepare(data, standardize);
  Vector values;
  Eigen::MatrixXd vectors;
  const auto n = static_cast<double>(data.cols());
  if (data.cols() <= data.rows())
    descending_eigen(p.centred.transpose() * p.centred / n, values, vectors);
  else
    descending_eigen(p.centred * p.centred.transpose() / n, values, vectors);
  return rank_of(values);
}

Vector standardize_input(const PcaModel& model, const Vector& x) {
  if (x.size() != model.input_dim())
    throw InvalidArgument(fmt::format("PCA expects dimension {}, got {}", model.input_dim(), x.size()));
  Vector z = x - model.mean;
  if (model.standardized)
    for (Eigen::Index j = 0; j < z.size(); ++j)
      z[j] = model.scale[j] == 0.0 ? 0.0 : z[j] / model.scale[j];
  return z;
}

Vector project(const PcaModel& model, const Vector& x) {
  return project(model, FeatureMatrix(x)).col(0);
}

Eigen::MatrixXd project(const PcaModel& model, const FeatureMatrix& x) {
  if (x.rows() != model.input_dim())
    throw InvalidArgument(fmt::format("PCA expects dimension {}, got {}", model.input_dim(), x.rows()));
  Eigen::MatrixXd z = x.colwise() - model.mean;
  if (model.standardized)
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
      if (model.scale[j] == 0.0)
        z.row(j).setZero();
      else
        z.row(j) /= model.scale[j];
    }
  return model.basis.transpose() * z;
}

}  // namespace biorec
