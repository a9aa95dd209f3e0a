#include "cogs/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cogs/errors.hpp"

namespace cogs {

void validate_instance(const TspInstance& instance) {
  if (instance.n() < 2)
    throw InvalidArgumentError("instance must contain at least 2 points");
  for (const auto& p : instance.points) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0) ||
        !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidArgumentError("instance coordinates must lie in [0,1]^2");
    }
  }
}

bool is_permutation_of_n(std::span<const int> order, int n) {
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<bool> seen(n, false);
  for (const int v : order) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

double euclidean(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

Eigen::MatrixXd distance_matrix(const TspInstance& instance) {
  const int n = instance.n();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist = euclidean(instance.points[i], instance.points[j]);
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

double tour_length(const TspInstance& instance, std::span<const int> order) {
  const int n = instance.n();
  if (!is_permutation_of_n(order, n))
    throw InvalidArgumentError("tour order is not a permutation of 0..n-1");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int a = order[i];
    const int b = order[(i + 1) % n];
    total += euclidean(instance.points[a], instance.points[b]);
  }
  return total;
}

Tour make_tour(const TspInstance& instance, std::vector<int> order) {
  Tour t;
  t.length = tour_length(instance, order);
  t.order = std::move(order);
  return t;
}

double optimality_gap(double model_cost, double oracle_cost) {
  if (!(oracle_cost > 0.0))
    throw InvalidArgumentError("optimality_gap: oracle cost must be positive");
  return (model_cost - oracle_cost) / oracle_cost;
}

TspInstance normalize_to_unit_square(std::span<const Point> points) {
  if (points.size() < 2)
    throw InvalidArgumentError("normalize: need at least 2 points");
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -min_x;
  double max_y = -min_y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  // One scale factor for both axes; dividing by the span makes the larger
  // axis land on exactly 1 (x/x == 1 in IEEE arithmetic).
  const double span = std::max(max_x - min_x, max_y - min_y);
  if (!(span > 0.0))
    throw DegenerateInputError("normalize: all points are identical");
  TspInstance out;
  out.points.reserve(points.size());
  for (const auto& p : points)
    out.points.push_back({(p.x - min_x) / span, (p.y - min_y) / span});
  return out;
}

} // namespace cogs
