#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tabeval/matrix.hpp"

namespace tabeval {

/// Mean vector and covariance matrix of a feature-space sample, treated as a
/// multivariate normal.
struct GaussianSummary {
  Vector mean;
  SquareMatrix cov;
  std::size_t n_samples = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Sample mean and (n-1)-denominator covariance. Throws TooFewSamples for n < 2.
GaussianSummary mean_cov(const Matrix& samples);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues within the
/// tolerance below zero are clamped to 0; anything more negative throws
/// IndefiniteMatrix, and an asymmetric input throws NotSymmetric. Both
/// tolerances are 1e-8 scaled by max(1, max |A_ij|).
SquareMatrix sym_sqrt(const SquareMatrix& a);

struct FrechetDetail {
  double value = 0.0;
  std::size_t clamped_eigenvalues = 0;  // small negative eigenvalues set to 0
  bool clamped_result = false;          // raw distance was negative, reported as 0
};

/// Wasserstein-2 distance between two Gaussians:
///   |mu_r - mu_s|^2 + Tr(S_r) + Tr(S_s) - 2 Tr((S_r^1/2 S_s S_r^1/2)^1/2)
/// Throws DimensionMismatch.
FrechetDetail frechet_distance_detail(const GaussianSummary& r, const GaussianSummary& s);
double frechet_distance(const GaussianSummary& r, const GaussianSummary& s);

/// Exact two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|.
/// Throws EmptySample.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Un-halved L1 distance between two normalized count vectors indexed over a
/// shared category axis; range [0, 2]. Throws EmptySample if either side sums
/// to 0 and LengthMismatch if the axes differ.
double tvd(std::span<const double> p_counts, std::span<const double> q_counts);

/// Sample Pearson correlation, clamped to [-1, 1]; 0 when either side has zero
/// variance. Throws LengthMismatch (also for fewer than 2 points).
double pearson(std::span<const double> x, std::span<const double> y);

struct DiscreteDistribution {
  std::vector<std::string> categories;
  std::vector<double> probs;
};

/// Shannon entropy in nats with 0 ln 0 = 0.
double entropy(std::span<const double> probs);
inline double entropy(const DiscreteDistribution& p) { return entropy(p.probs); }

}  // namespace tabeval
