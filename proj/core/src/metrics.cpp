#include "biorec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "biorec/error.hpp"

namespace biorec {

namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth, int num_categories) {
  if (predictions.size() != truth.size())
    throw InvalidArgument(fmt::format("{} predictions for {} labels", predictions.size(), truth.size()));
  if (num_categories < 1) throw InvalidArgument("need at least one category");
  Metrics m;
  m.confusion = Eigen::MatrixXi::Zero(num_categories, num_categories);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_categories || predictions[i] < 0 || predictions[i] >= num_categories)
      throw InvalidArgument(fmt::format("label out of range at sample {}", i));
    ++m.confusion(truth[i], predictions[i]);
  }
  m.accuracy = ratio(m.confusion.trace(), static_cast<double>(truth.size()));
  const auto c = static_cast<std::size_t>(num_categories);
  m.precision.resize(c);
  m.recall.resize(c);
  m.f1.resize(c);
  for (int k = 0; k < num_categories; ++k) {
    const double tp = m.confusion(k, k);
    const auto i = static_cast<std::size_t>(k);
    m.precision[i] = ratio(tp, m.confusion.col(k).sum());
    m.recall[i] = ratio(tp, m.confusion.row(k).sum());
    m.f1[i] = ratio(2 * m.precision[i] * m.recall[i], m.precision[i] + m.recall[i]);
  }
  m.macro_precision = mean_of(m.precision);
  m.macro_recall = mean_of(m.recall);
  m.macro_f1 = mean_of(m.f1);
  return m;
}

RocCurve roc_one_vs_rest(const Eigen::MatrixXd& scores, const std::vector<int>& truth) {
  const auto m = static_cast<std::size_t>(scores.cols());
  if (m == 0) throw InvalidArgument("ROC needs at least one sample");
  if (truth.size() != m) throw InvalidArgument("score columns do not match truth length");
  for (int t : truth)
    if (t < 0 || t >= scores.rows()) throw InvalidArgument(fmt::format("label {} out of range", t));
  if (std::all_of(truth.begin(), truth.end(), [&](int t) { return t == truth.front(); }))
    throw InvalidArgument("ROC is undefined for single-category truth");

  RocCurve roc;
  std::vector<double> defined;
  for (Eigen::Index c = 0; c < scores.rows(); ++c) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores(c, a) > scores(c, b); });
    const auto positives = static_cast<double>(std::count(truth.begin(), truth.end(), c));
    const double negatives = static_cast<double>(m) - positives;

    std::vector<double> fpr{0.0};
    std::vector<double> tpr{0.0};
    double tp = 0;
    double fp = 0;
    double area = 0;
    for (std::size_t i = 0; i < m;) {
      const double threshold = scores(c, order[i]);
      for (; i < m && scores(c, order[i]) == threshold; ++i)
        (truth[order[i]] == c ? tp : fp) += 1.0;
      const double x = ratio(fp, negatives);
      const double y = ratio(tp, positives);
      area += (x - fpr.back()) * (y + tpr.back()) / 2.0;
      fpr.push_back(x);
      tpr.push_back(y);
    }
    const bool ok = positives > 0 && negatives > 0;
    roc.fpr.push_back(std::move(fpr));
    roc.tpr.push_back(std::move(tpr));
    roc.auc.push_back(ok ? area : std::numeric_limits<double>::quiet_NaN());
    if (ok) defined.push_back(area);
  }
  roc.macro_auc = mean_of(defined);
  return roc;
}

MetricSummary aggregate_splits(const std::vector<Metrics>& per_split) {
  if (per_split.empty()) throw InvalidArgument("no splits to aggregate");
  std::vector<double> acc, prec, rec, f1;
  for (const auto& m : per_split) {
    acc.push_back(m.accuracy);
    prec.push_back(m.macro_precision);
    rec.push_back(m.macro_recall);
    f1.push_back(m.macro_f1);
  }
  MetricSummary s;
  s.splits = per_split.size();
  s.accuracy_mean = mean_of(acc);
  s.accuracy_std = population_std(acc, s.accuracy_mean);
  s.precision_mean = mean_of(prec);
  s.precision_std = population_std(prec, s.precision_mean);
  s.recall_mean = mean_of(rec);
  s.recall_std = population_std(rec, s.recall_mean);
  s.f1_mean = mean_of(f1);
  s.f1_std = population_std(f1, s.f1_mean);
  s.accuracy_best = *std::max_element(acc.begin(), acc.end());
  return s;
}

}  // namespace biorec
