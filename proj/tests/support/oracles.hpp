#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tabeval/autoenc.hpp"
#include "tabeval/numstats.hpp"

namespace tabeval::oracle {

/// Frechet distance between diagonal Gaussians:
/// sum_i (dmu_i^2 + (sqrt(a_i) - sqrt(b_i))^2).
inline double diagonal_frechet(const Vector& mr, const Vector& vr, const Vector& ms, const Vector& vs) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < mr.size(); ++i) {
    d += (mr[i] - ms[i]) * (mr[i] - ms[i]) + std::pow(std::sqrt(vr[i]) - std::sqrt(vs[i]), 2);
  }
  return d;
}

/// sup_t |F_a(t) - F_b(t)| evaluated at every sample point by direct counting.
inline double ks(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  for (double t : points) {
    double fa = 0.0, fb = 0.0;
    for (double v : a) fa += v <= t ? 1.0 : 0.0;
    for (double v : b) fb += v <= t ? 1.0 : 0.0;
    best = std::max(best, std::abs(fa / static_cast<double>(a.size()) - fb / static_cast<double>(b.size())));
  }
  return best;
}

/// Un-halved L1 distance between the empirical distributions of two samples.
inline double tvd(const std::vector<int>& p, const std::vector<int>& q) {
  std::map<int, double> fp, fq;
  for (int v : p) fp[v] += 1.0 / static_cast<double>(p.size());
  for (int v : q) fq[v] += 1.0 / static_cast<double>(q.size());
  for (const auto& [k, v] : fp) fq[k] += 0.0;
  double d = 0.0;
  for (const auto& [k, v] : fq) d += std::abs(fp[k] - v);
  return d;
}

struct Split {
  std::size_t feature;
  double threshold;
};

/// Exhaustive best binary split. Score = sum_c n_lc^2 / n_l + sum_c n_rc^2 / n_r
/// (larger means lower weighted Gini), compared exactly as integer fractions.
/// Ties keep the lowest feature, then the lowest threshold.
inline std::optional<Split> gini_split(const Eigen::MatrixXd& x, const std::vector<std::uint32_t>& y,
                                       std::size_t min_leaf) {
  std::optional<Split> best;
  std::int64_t best_num = 0, best_den = 1;
  const auto n = static_cast<std::size_t>(x.rows());
  for (std::size_t f = 0; f < static_cast<std::size_t>(x.cols()); ++f) {
    std::vector<double> values(n);
    for (std::size_t r = 0; r < n; ++r) values[r] = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      const double t = distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0;
      std::int64_t l[2] = {0, 0}, rr[2] = {0, 0};
      for (std::size_t r = 0; r < n; ++r) (values[r] <= t ? l : rr)[y[r]]++;
      const std::int64_t nl = l[0] + l[1], nr = rr[0] + rr[1];
      if (nl < static_cast<std::int64_t>(min_leaf) || nr < static_cast<std::int64_t>(min_leaf)) continue;
      const std::int64_t num = (l[0] * l[0] + l[1] * l[1]) * nr + (rr[0] * rr[0] + rr[1] * rr[1]) * nl;
      const std::int64_t den = nl * nr;
      if (!best || num * best_den > best_num * den) {
        best = Split{f, t};
        best_num = num;
        best_den = den;
      }
    }
  }
  return best;
}

/// ||g_numeric - g_analytic|| / ||max(|g_numeric|, |g_analytic|)|| with central
/// differences of step h.
inline double gradient_relative_error(const AutoencoderModel& m, const Matrix& x, double h = 1e-6) {
  const std::vector<double> params = flatten_parameters(m);
  std::vector<double> grad;
  loss_and_gradient(m, x, &grad);
  double diff_sq = 0.0, norm_sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> plus = params, minus = params;
    plus[i] += h;
    minus[i] -= h;
    AutoencoderModel mp = m, mm = m;
    assign_parameters(mp, plus);
    assign_parameters(mm, minus);
    const double numeric = (loss_and_gradient(mp, x, nullptr) - loss_and_gradient(mm, x, nullptr)) / (2 * h);
    diff_sq += (numeric - grad[i]) * (numeric - grad[i]);
    norm_sq += std::max(numeric * numeric, grad[i] * grad[i]);
  }
  return std::sqrt(diff_sq / norm_sq);
}

}  // namespace tabeval::oracle
