#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "tabeval/numstats.hpp"
#include "tabeval/pca.hpp"
#include "test_util.hpp"

namespace tabeval {
namespace {

// Covariance eigenvalues, descending, computed independently of fit_pca.
std::vector<double> eigenvalue_oracle(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const SquareMatrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<SquareMatrix> solver(cov, Eigen::EigenvaluesOnly);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + cov.rows());
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

TEST(Pca, SingleAxisVariance) {
  Rng rng(1);
  Matrix x = Matrix::Zero(100, 3);
  for (Eigen::Index r = 0; r < 100; ++r) x(r, 1) = rng.normal();
  const auto m = fit_pca(x, VarianceFraction{0.95});
  ASSERT_EQ(m.k(), 1u);
  EXPECT_NEAR(m.components(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(m.explained_variance[0] / m.total_variance, 1.0, 1e-12);
}

TEST(Pca, IsotropicNeedsAllComponents) {
  const Matrix x = testing::random_matrix(2000, 4, 2);
  const auto ev = eigenvalue_oracle(x);
  const double total = ev[0] + ev[1] + ev[2] + ev[3];
  EXPECT_LT((ev[0] + ev[1] + ev[2]) / total, 0.95);  // oracle: three components are not enough
  EXPECT_EQ(fit_pca(x, VarianceFraction{0.95}).k(), 4u);
}

TEST(Pca, VarianceTargetMatchesEigenvalueOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(10);
    Matrix x = testing::random_matrix(300, d, rng.next());
    for (std::size_t c = 0; c < d; ++c) x.col(static_cast<Eigen::Index>(c)) *= 0.2 + 3.0 * rng.uniform();
    const double v = 0.5 + 0.49 * rng.uniform();
    const auto ev = eigenvalue_oracle(x);
    double total = 0.0, running = 0.0;
    for (double e : ev) total += e;
    std::size_t k = 0;
    while (running < v * total) running += ev[k++];
    const auto m = fit_pca(x, VarianceFraction{v});
    EXPECT_EQ(m.k(), k);
    for (std::size_t i = 0; i < m.k(); ++i) EXPECT_NEAR(m.explained_variance[i], ev[i], 1e-9 * ev[0]);
  }
}

TEST(Pca, VarianceTargetCappedAtFifty) {
  const auto m = fit_pca(testing::random_matrix(400, 80, 4), VarianceFraction{0.95});
  EXPECT_EQ(m.k(), kMaxVarianceComponents);
}

TEST(Pca, FullRankProjectionPreservesDistances) {
  const Matrix x = testing::random_matrix(30, 5, 5);
  const auto m = fit_pca(x, FixedComponents{5});
  const Matrix z = project(m, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      EXPECT_NEAR((z.row(i) - z.row(j)).norm(), (x.row(i) - x.row(j)).norm(), 1e-8);
    }
  }
}

TEST(Pca, ModelInvariants) {
  Matrix x = testing::random_matrix(500, 6, 6);
  x.col(2) = x.col(0) * 2.0 + x.col(1);
  const auto m = fit_pca(x, FixedComponents{4});
  EXPECT_TRUE((m.components * m.components.transpose()).isApprox(SquareMatrix::Identity(4, 4), 1e-8));
  for (std::size_t i = 0; i < m.k(); ++i) {
    EXPECT_GE(m.explained_variance[i], 0.0);
    if (i > 0) EXPECT_LE(m.explained_variance[i], m.explained_variance[i - 1]);
    Eigen::Index arg;
    m.components.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.components(static_cast<Eigen::Index>(i), arg), 0.0);
  }
}

TEST(Pca, ProjectedFittingDataIsCenteredAndDecorrelated) {
  const Matrix x = testing::random_matrix(300, 5, 7) * testing::random_matrix(5, 5, 8);
  const auto m = fit_pca(x, FixedComponents{5});
  const auto g = mean_cov(project(m, x));
  EXPECT_LT(g.mean.cwiseAbs().maxCoeff(), 1e-9);
  SquareMatrix off = g.cov;
  off.diagonal().setZero();
  EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, ZeroRowsProjectToEmpty) {
  const auto m = fit_pca(testing::random_matrix(50, 4, 9), FixedComponents{2});
  const Matrix z = project(m, Matrix(0, 4));
  EXPECT_EQ(z.rows(), 0);
  EXPECT_EQ(z.cols(), 2);
}

TEST(Pca, RankTwoReconstruction) {
  const Matrix x = testing::random_matrix(1000, 2, 10) * testing::random_matrix(2, 10, 11);
  const auto m = fit_pca(x, FixedComponents{2});
  EXPECT_LT((back_project(m, project(m, x)) - x).array().square().mean(), 1e-10);
}

TEST(Pca, DeterministicSignsAcrossScaling) {
  const Matrix x = testing::random_matrix(200, 5, 12);
  const auto a = fit_pca(x, FixedComponents{3});
  const auto b = fit_pca(x, FixedComponents{3});
  EXPECT_EQ(a.components, b.components);
  const auto negated = fit_pca(-x, FixedComponents{3});
  EXPECT_TRUE(negated.components.isApprox(a.components, 1e-9));
}

TEST(Pca, Errors) {
  EXPECT_TABEVAL_ERROR(fit_pca(Matrix::Zero(1, 3), FixedComponents{1}), ErrorCode::TooFewSamples);
  EXPECT_TABEVAL_ERROR(fit_pca(testing::random_matrix(5, 8, 1), FixedComponents{5}), ErrorCode::RankTooLow);
  const Matrix rank_one = testing::random_matrix(50, 1, 2) * testing::random_matrix(1, 4, 3);
  EXPECT_TABEVAL_ERROR(fit_pca(rank_one, FixedComponents{2}), ErrorCode::RankTooLow);
  const auto m = fit_pca(testing::random_matrix(50, 4, 4), FixedComponents{2});
  EXPECT_TABEVAL_ERROR(project(m, Matrix::Zero(3, 5)), ErrorCode::DimensionMismatch);
}

TEST(Pca, TargetJsonRoundTrip) {
  const PcaTarget fixed = FixedComponents{7};
  const PcaTarget frac = VarianceFraction{0.9};
  EXPECT_EQ(std::get<FixedComponents>(pca_target_from_json(to_json(fixed))).k, 7u);
  EXPECT_EQ(std::get<VarianceFraction>(pca_target_from_json(to_json(frac))).fraction, 0.9);
}

}  // namespace
}  // namespace tabeval
