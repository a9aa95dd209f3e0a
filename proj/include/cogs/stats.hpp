#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cogs/core.hpp"

namespace cogs {

double mean(std::span<const double> values);

/// Sample standard deviation (n-1 denominator). Requires >= 2 values.
double sample_stddev(std::span<const double> values);

/// Standard Pearson r. Throws UndefinedCorrelation (InvalidArgumentError)
/// when either column is constant or fewer than 3 records are given.
double pearson_correlation(std::span<const double> xs,
                           std::span<const double> ys);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0; // two-sided
};

/// Welch's unequal-variance two-sample t-test. Two identical zero-variance
/// groups give t = 0, p = 1; separated zero-variance groups give p = 0.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Mean over the worst ceil(percent/100 * N) entries. `gaps` need not be
/// sorted. percent in (0, 100].
double worst_tail_mean(std::span<const double> gaps, double percent);

struct PcaResult {
  Matrix projected;                             // rows x k
  std::vector<double> explained_variance_ratio; // descending, length k
};

/// Principal component analysis of row samples: center, eigendecompose the
/// covariance, project onto the top-k components (descending eigenvalue).
PcaResult pca_project(const Matrix& rows, int k);

/// Area of the convex hull of a 2D point set (0 for degenerate sets).
double convex_hull_area(std::span<const Point> points);

} // namespace cogs
