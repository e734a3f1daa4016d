#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "biorec/error.hpp"
#include "biorec/scg.hpp"
#include "fixtures.hpp"

using namespace biorec;

namespace {

/// E(w) = 0.5 w'Aw - b'w
Objective quadratic(const Eigen::MatrixXd& a, const Vector& b) {
  return [a, b](const Vector& w, Vector* g) {
    if (g) *g = a * w - b;
    return 0.5 * w.dot(a * w) - b.dot(w);
  };
}

Eigen::MatrixXd spd(Eigen::Index n, std::uint64_t seed) {
  const auto m = biorec::testing::random_matrix(n, n, seed);
  return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(Scg, ConvergesToQuadraticMinimum) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = spd(8, s);
    const Vector b = biorec::testing::random_matrix(8, 1, s + 50);
    ScaledConjugateGradient scg(quadratic(a, b), Vector::Zero(8));
    for (int i = 0; i < 500 && scg.gradient_norm() > 1e-12; ++i) scg.step();
    const Vector exact = a.ldlt().solve(b);
    EXPECT_LE((scg.weights() - exact).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Scg, LossNeverIncreases) {
  const auto a = spd(6, 3);
  const Vector b = Vector::LinSpaced(6, -1, 1);
  // A non-quadratic objective exercises rejected steps too.
  Objective obj = [&](const Vector& w, Vector* g) {
    const double q = 0.5 * w.dot(a * w) - b.dot(w);
    const double quartic = 0.25 * w.array().pow(4).sum();
    if (g) *g = a * w - b + Vector(w.array().cube());
    return q + quartic;
  };
  ScaledConjugateGradient scg(obj, Vector::Constant(6, 3.0));
  double prev = scg.loss();
  for (int i = 0; i < 200; ++i) {
    const auto st = scg.step();
    EXPECT_LE(st.loss, prev);
    if (!st.accepted) EXPECT_EQ(st.loss, prev);
    prev = st.loss;
  }
}

TEST(Scg, GoodQuadraticModelHalvesLambda) {
  const auto a = spd(4, 7);
  const Vector b = Vector::Ones(4);
  ScaledConjugateGradient scg(quadratic(a, b), Vector::Zero(4));
  EXPECT_EQ(scg.lambda(), 5e-7);
  const auto st = scg.step();
  EXPECT_TRUE(st.accepted);
  EXPECT_GT(st.comparison, 0.75);
  EXPECT_DOUBLE_EQ(scg.lambda(), 2.5e-7);
}

TEST(Scg, PoorModelRaisesLambda) {
  // Nearly linear far from the minimum: the flat curvature sends the step far past it.
  Objective obj = [](const Vector& w, Vector* g) {
    const Eigen::ArrayXd root = (1.0 + w.array().square()).sqrt();
    if (g) *g = Vector(w.array() / root);
    return root.sum();
  };
  ScaledConjugateGradient scg(obj, Vector::Constant(2, 10.0));
  double before = scg.lambda();
  bool raised = false;
  for (int i = 0; i < 20 && !raised; ++i) {
    const auto st = scg.step();
    if (st.comparison < 0.25) raised = scg.lambda() > before;
    before = scg.lambda();
  }
  EXPECT_TRUE(raised);
}

TEST(Scg, ConjugateDirectionsSolveTwoDimensionalQuadraticInTwoSteps) {
  Eigen::MatrixXd a(2, 2);
  a << 10, 1, 1, 1;
  const Vector b = Vector::Ones(2);
  ScaledConjugateGradient cg(quadratic(a, b), Vector::Zero(2));
  cg.step();
  cg.step();
  EXPECT_LT(cg.gradient_norm(), 1e-5);

  ScgOptions steepest;
  steepest.restart_interval = 1;
  ScaledConjugateGradient sd(quadratic(a, b), Vector::Zero(2), steepest);
  sd.step();
  sd.step();
  EXPECT_GT(sd.gradient_norm(), 1e-3);
}

TEST(Scg, NonFiniteInitialLossThrows) {
  Objective obj = [](const Vector&, Vector* g) {
    if (g) g->setZero();
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(ScaledConjugateGradient(obj, Vector::Zero(3)), TrainingDivergence);
}

TEST(Scg, SecondNonFiniteTrialThrowsAfterOneReset) {
  int calls = 0;
  Objective obj = [&](const Vector& w, Vector* g) {
    ++calls;
    if (g) *g = w - Vector::Ones(w.size());
    // Finite only at the start point and for the curvature probe.
    if (w.cwiseAbs().maxCoeff() > 1e-3) return std::numeric_limits<double>::infinity();
    return 0.5 * (w - Vector::Ones(w.size())).squaredNorm();
  };
  ScaledConjugateGradient scg(obj, Vector::Zero(2));
  const auto first = scg.step();
  EXPECT_FALSE(first.accepted);
  EXPECT_EQ(scg.lambda(), 5e-7);
  EXPECT_THROW(scg.step(), TrainingDivergence);
}
