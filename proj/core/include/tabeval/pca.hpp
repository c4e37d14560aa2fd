#pragma once

#include <cstddef>
#include <variant>

#include <nlohmann/json.hpp>

#include "tabeval/dataio.hpp"
#include "tabeval/matrix.hpp"

namespace tabeval {

struct FixedComponents {
  std::size_t k = 1;
};
struct VarianceFraction {
  double fraction = 0.95;
};
/// Either an explicit component count or the smallest count reaching a
/// cumulative explained-variance fraction (capped at kMaxVarianceComponents).
using PcaTarget = std::variant<FixedComponents, VarianceFraction>;

inline constexpr std::size_t kMaxVarianceComponents = 50;

nlohmann::json to_json(const PcaTarget& target);
PcaTarget pca_target_from_json(const nlohmann::json& doc);

struct PcaModel {
  Vector mean;                // d
  Matrix components;          // k x d, orthonormal rows
  Vector explained_variance;  // k, non-increasing
  double total_variance = 0.0;

  std::size_t k() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Eigendecomposition of the sample covariance. Components are ordered by
/// decreasing eigenvalue (exact ties by the axis of the largest-magnitude
/// entry) and signed so their largest-magnitude entry is positive.
/// Errors: TooFewSamples, RankTooLow.
PcaModel fit_pca(const Matrix& x, const PcaTarget& target);
inline PcaModel fit_pca(const EncodedMatrix& x, const PcaTarget& target) { return fit_pca(x.values, target); }

/// (x - mean) * components^T. Throws DimensionMismatch.
Matrix project(const PcaModel& m, const Matrix& x);
inline Matrix project(const PcaModel& m, const EncodedMatrix& x) { return project(m, x.values); }

/// Maps projected coordinates back into the input space.
Matrix back_project(const PcaModel& m, const Matrix& z);

}  // namespace tabeval
