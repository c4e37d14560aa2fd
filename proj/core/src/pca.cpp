#include "tabeval/pca.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "tabeval/error.hpp"
#include "tabeval/numstats.hpp"

namespace tabeval {
namespace {

// Index of the first entry with the largest magnitude.
Eigen::Index dominant_axis(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

}  // namespace

nlohmann::json to_json(const PcaTarget& target) {
  if (const auto* fixed = std::get_if<FixedComponents>(&target)) return {{"k", fixed->k}};
  return {{"variance_fraction", std::get<VarianceFraction>(target).fraction}};
}

PcaTarget pca_target_from_json(const nlohmann::json& doc) {
  if (doc.contains("k")) return FixedComponents{doc["k"].get<std::size_t>()};
  return VarianceFraction{doc.value("variance_fraction", 0.95)};
}

PcaModel fit_pca(const Matrix& x, const PcaTarget& target) {
  if (x.rows() < 2) throw Error(ErrorCode::TooFewSamples, "PCA needs at least 2 rows");
  const GaussianSummary g = mean_cov(x);
  const auto d = static_cast<Eigen::Index>(g.dim());

  Eigen::SelfAdjointEigenSolver<SquareMatrix> solver(g.cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::RankTooLow, "eigendecomposition failed");
  const Vector& values = solver.eigenvalues();
  SquareMatrix vectors = solver.eigenvectors();

  std::vector<Eigen::Index> axis(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector v = vectors.col(i);
    axis[static_cast<std::size_t>(i)] = dominant_axis(v);
    if (v[axis[static_cast<std::size_t>(i)]] < 0.0) vectors.col(i) = -v;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return axis[static_cast<std::size_t>(a)] < axis[static_cast<std::size_t>(b)];
  });

  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) total += std::max(0.0, values[i]);
  const double top = std::max(0.0, values[order.front()]);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (values[i] > 1e-12 * std::max(top, 1e-300)) ++rank;
  }
  rank = std::min<std::size_t>(rank, static_cast<std::size_t>(x.rows() - 1));

  std::size_t k = 0;
  if (const auto* fixed = std::get_if<FixedComponents>(&target)) {
    k = fixed->k;
    const auto limit = std::min<std::size_t>(static_cast<std::size_t>(x.rows() - 1), static_cast<std::size_t>(d));
    if (k < 1 || k > limit || k > rank) {
      throw Error(ErrorCode::RankTooLow, "requested " + std::to_string(k) + " components but rank is " +
                                             std::to_string(rank));
    }
  } else {
    const double fraction = std::get<VarianceFraction>(target).fraction;
    if (!(fraction > 0.0 && fraction <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "variance fraction must lie in (0, 1]");
    }
    k = 1;
    if (total > 0.0) {
      double cumulative = 0.0;
      k = 0;
      for (auto idx : order) {
        cumulative += std::max(0.0, values[idx]);
        ++k;
        if (cumulative >= fraction * total) break;
      }
    }
    k = std::min({k, kMaxVarianceComponents, std::max<std::size_t>(rank, 1)});
  }

  PcaModel m;
  m.mean = g.mean;
  m.total_variance = total;
  m.components.resize(static_cast<Eigen::Index>(k), d);
  m.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    m.components.row(static_cast<Eigen::Index>(i)) = vectors.col(order[i]).transpose();
    m.explained_variance[static_cast<Eigen::Index>(i)] = std::max(0.0, values[order[i]]);
  }
  return m;
}

Matrix project(const PcaModel& m, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input width " + std::to_string(x.cols()) +
                                                  " differs from PCA dimension " + std::to_string(m.input_dim()));
  }
  if (x.rows() == 0) return Matrix(0, static_cast<Eigen::Index>(m.k()));
  return (x.rowwise() - m.mean.transpose()) * m.components.transpose();
}

Matrix back_project(const PcaModel& m, const Matrix& z) {
  if (static_cast<std::size_t>(z.cols()) != m.k()) {
    throw Error(ErrorCode::DimensionMismatch, "projected width differs from k");
  }
  Matrix x = z * m.components;
  x.rowwise() += m.mean.transpose();
  return x;
}

}  // namespace tabeval
