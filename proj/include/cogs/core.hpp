#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cogs {

using Matrix = Eigen::MatrixXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// A TSP instance: n locations in the unit square. Points are stored in
/// order (the order matters to sequence models), duplicates are permitted.
struct TspInstance {
  std::vector<Point> points;

  int n() const { return static_cast<int>(points.size()); }
};

/// A closed tour over an instance: a permutation of {0..n-1} plus its
/// cached cycle length.
struct Tour {
  std::vector<int> order;
  double length = 0.0;
};

/// Throws InvalidArgumentError unless every coordinate is in [0,1] and n >= 2.
void validate_instance(const TspInstance& instance);

/// True iff `order` contains each of 0..n-1 exactly once.
bool is_permutation_of_n(std::span<const int> order, int n);

/// Full pairwise Euclidean distance matrix (symmetric, zero diagonal).
Eigen::MatrixXd distance_matrix(const TspInstance& instance);

double euclidean(const Point& a, const Point& b);

/// Closed-cycle length of `order` over `instance`, including the return
/// edge. Rejects non-permutations.
double tour_length(const TspInstance& instance, std::span<const int> order);

Tour make_tour(const TspInstance& instance, std::vector<int> order);

/// Relative excess of model_cost over oracle_cost. Requires oracle_cost > 0.
double optimality_gap(double model_cost, double oracle_cost);

/// Translate and uniformly scale (one factor for both axes) so that all
/// coordinates land in [0,1] and the larger axis span is exactly 1.
/// Throws DegenerateInputError when all points coincide.
TspInstance normalize_to_unit_square(std::span<const Point> points);

} // namespace cogs
