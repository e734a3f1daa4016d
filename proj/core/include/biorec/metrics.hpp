#pragma once

#include <string>
#include <vector>

#include "biorec/image.hpp"

namespace biorec {

/// Classification metrics. Precision (recall) of a category with no
/// predictions (no support) is 0, and so is its F1.
struct Metrics {
  double accuracy = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  Eigen::MatrixXi confusion;  ///< rows = truth, columns = prediction
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth, int num_categories);

struct RocCurve {
  std::vector<std::vector<double>> fpr;  ///< per category
  std::vector<std::vector<double>> tpr;
  std::vector<double> auc;               ///< NaN for a category absent from (or filling) the truth
  double macro_auc = 0;                  ///< over categories with a defined AUC
};

/// One-vs-rest ROC from a C x M score matrix. Thresholds sweep each score
/// row from high to low with tied scores grouped into one step; AUC is the
/// trapezoidal area. Throws InvalidArgument when the truth holds fewer than
/// two categories.
RocCurve roc_one_vs_rest(const Eigen::MatrixXd& scores, const std::vector<int>& truth);

/// Mean and population standard deviation of the scalar metrics.
struct MetricSummary {
  double accuracy_mean = 0, accuracy_std = 0;
  double precision_mean = 0, precision_std = 0;
  double recall_mean = 0, recall_std = 0;
  double f1_mean = 0, f1_std = 0;
  double accuracy_best = 0;
  std::size_t splits = 0;
};

MetricSummary aggregate_splits(const std::vector<Metrics>& per_split);

}  // namespace biorec
