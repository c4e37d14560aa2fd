#include "tabeval/numstats.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "tabeval/error.hpp"

namespace tabeval {
namespace {

constexpr double kEigenTolerance = 1e-8;

double scale_of(const SquareMatrix& a) {
  return std::max(1.0, a.cwiseAbs().maxCoeff());
}

void check_symmetric(const SquareMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  if (a.size() == 0) return;
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kEigenTolerance * scale_of(a)) {
    throw Error(ErrorCode::NotSymmetric, "max asymmetry " + std::to_string(asym));
  }
}

// Eigenvalues of a symmetric matrix with the clamping rule applied.
Vector clamped_eigenvalues(const Eigen::SelfAdjointEigenSolver<SquareMatrix>& solver, double scale,
                           std::size_t* clamped) {
  Vector ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 0.0) {
      if (ev[i] < -kEigenTolerance * scale) {
        throw Error(ErrorCode::IndefiniteMatrix, "eigenvalue " + std::to_string(ev[i]));
      }
      ev[i] = 0.0;
      if (clamped) ++*clamped;
    }
  }
  return ev;
}

}  // namespace

GaussianSummary mean_cov(const Matrix& samples) {
  const auto n = samples.rows();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
  GaussianSummary g;
  g.n_samples = static_cast<std::size_t>(n);
  g.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  // Exact symmetry; the product above is symmetric only up to rounding.
  g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
  return g;
}

SquareMatrix sym_sqrt(const SquareMatrix& a) {
  check_symmetric(a);
  if (a.size() == 0) return a;
  const SquareMatrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<SquareMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::IndefiniteMatrix, "eigendecomposition failed to converge");
  }
  const Vector ev = clamped_eigenvalues(solver, scale_of(a), nullptr);
  const SquareMatrix& v = solver.eigenvectors();
  SquareMatrix root = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
  return 0.5 * (root + root.transpose());
}

FrechetDetail frechet_distance_detail(const GaussianSummary& r, const GaussianSummary& s) {
  if (r.dim() != s.dim() || static_cast<std::size_t>(r.cov.rows()) != r.dim() ||
      static_cast<std::size_t>(s.cov.rows()) != s.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "summaries have dimensions " + std::to_string(r.dim()) + " and " + std::to_string(s.dim()));
  }
  FrechetDetail out;
  if (r.dim() == 0) return out;

  const double mean_term = (r.mean - s.mean).squaredNorm();
  const SquareMatrix root_r = sym_sqrt(r.cov);
  SquareMatrix inner = root_r * s.cov * root_r;
  inner = 0.5 * (inner + inner.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<SquareMatrix> solver(inner, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::IndefiniteMatrix, "eigendecomposition failed to converge");
  }
  const Vector ev = clamped_eigenvalues(solver, scale_of(inner), &out.clamped_eigenvalues);
  const double cross = ev.cwiseSqrt().sum();

  const double raw = mean_term + r.cov.trace() + s.cov.trace() - 2.0 * cross;
  if (raw < 0.0) {
    out.clamped_result = true;
    out.value = 0.0;
  } else {
    out.value = raw;
  }
  return out;
}

double frechet_distance(const GaussianSummary& r, const GaussianSummary& s) {
  return frechet_distance_detail(r, s).value;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "KS statistic needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    // Step past every copy of the smallest pending value on both sides.
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double tvd(std::span<const double> p_counts, std::span<const double> q_counts) {
  if (p_counts.size() != q_counts.size()) {
    throw Error(ErrorCode::LengthMismatch, "count vectors must share a category axis");
  }
  double p_total = 0.0, q_total = 0.0;
  for (double c : p_counts) p_total += c;
  for (double c : q_counts) q_total += c;
  if (!(p_total > 0.0) || !(q_total > 0.0)) throw Error(ErrorCode::EmptySample, "TVD needs non-zero counts");
  double d = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    d += std::abs(p_counts[i] / p_total - q_counts[i] / q_total);
  }
  return d;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "pearson needs equal-length inputs with at least 2 points");
  }
  auto constant = [](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo == *hi;
  };
  if (constant(x) || constant(y)) return 0.0;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace tabeval
