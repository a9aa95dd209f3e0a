#include "cogs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "cogs/errors.hpp"

namespace cogs {

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgumentError("mean: empty input");
  double total = 0.0;
  for (const double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2)
    throw InvalidArgumentError("sample_stddev: need at least 2 values");
  const double m = mean(values);
  double sq = 0.0;
  for (const double v : values) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

double pearson_correlation(std::span<const double> xs,
                           std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw InvalidArgumentError("pearson: length mismatch");
  if (xs.size() < 3)
    throw InvalidArgumentError("pearson: need at least 3 records");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw InvalidArgumentError("pearson: correlation undefined for a constant column");
  return sxy / std::sqrt(sxx * syy);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw InvalidArgumentError("welch_t_test: each group needs >= 2 samples");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  double va = 0.0, vb = 0.0;
  for (const double v : a) va += (v - ma) * (v - ma);
  for (const double v : b) vb += (v - mb) * (v - mb);
  va /= (na - 1.0);
  vb /= (nb - 1.0);

  const double se2 = va / na + vb / nb;
  WelchResult res;
  if (se2 == 0.0) {
    // Zero variance in both groups: identical means tie, distinct means
    // separate with certainty.
    if (ma == mb) return {0.0, na + nb - 2.0, 1.0};
    return {ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity(),
            na + nb - 2.0, 0.0};
  }
  res.t = (ma - mb) / std::sqrt(se2);
  const double num = se2 * se2;
  const double den = (va / na) * (va / na) / (na - 1.0) +
                     (vb / nb) * (vb / nb) / (nb - 1.0);
  res.dof = num / den;
  const boost::math::students_t dist(res.dof);
  res.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t)));
  return res;
}

double worst_tail_mean(std::span<const double> gaps, double percent) {
  if (gaps.empty()) throw InvalidArgumentError("worst_tail_mean: empty input");
  if (!(percent > 0.0 && percent <= 100.0))
    throw InvalidArgumentError("worst_tail_mean: percent must be in (0,100]");
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(percent / 100.0 * static_cast<double>(gaps.size())));
  std::vector<double> sorted(gaps.begin(), gaps.end());
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(),
                    std::greater<>());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += sorted[i];
  return total / static_cast<double>(k);
}

PcaResult pca_project(const Matrix& rows, int k) {
  const int n = static_cast<int>(rows.rows());
  const int d = static_cast<int>(rows.cols());
  if (n < 3) throw InvalidArgumentError("pca: need at least 3 samples");
  if (k < 1 || k > d) throw InvalidArgumentError("pca: bad component count");

  const Eigen::RowVectorXd center = rows.colwise().mean();
  const Matrix whitened = rows.rowwise() - center;
  const Matrix cov = (whitened.transpose() * whitened) / double(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericalFailureError("pca: eigendecomposition failed");
  // Eigen returns ascending eigenvalues; take the top k in descending order.
  const Eigen::VectorXd evals = solver.eigenvalues();
  const Matrix evecs = solver.eigenvectors();
  double total_var = 0.0;
  for (int i = 0; i < d; ++i) total_var += std::max(evals(i), 0.0);

  PcaResult res;
  res.projected.resize(n, k);
  res.explained_variance_ratio.resize(k);
  for (int c = 0; c < k; ++c) {
    const int src = d - 1 - c;
    res.projected.col(c) = whitened * evecs.col(src);
    res.explained_variance_ratio[c] =
        total_var > 0.0 ? std::max(evals(src), 0.0) / total_var : 0.0;
  }
  return res;
}

double convex_hull_area(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  const auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  // Monotone chain.
  std::vector<Point> hull(2 * pts.size());
  std::size_t h = 0;
  for (const auto& p : pts) {
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], p) <= 0) --h;
    hull[h++] = p;
  }
  const std::size_t lower = h + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (h >= lower && cross(hull[h - 2], hull[h - 1], *it) <= 0) --h;
    hull[h++] = *it;
  }
  hull.resize(h > 0 ? h - 1 : 0);
  if (hull.size() < 3) return 0.0;
  double area2 = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area2 += a.x * b.y - b.x * a.y;
  }
  return std::abs(area2) / 2.0;
}

} // namespace cogs
