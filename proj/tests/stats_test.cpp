#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cogs/errors.hpp"
#include "cogs/rng.hpp"
#include "cogs/stats.hpp"
#include "test_util.hpp"

using namespace cogs;

namespace {

// Independent Welch-t implementation (Welford accumulation, long double)
// used as the reference for the fuzz comparison.
long double reference_welch_t(std::span<const double> a,
                              std::span<const double> b) {
  const auto moments = [](std::span<const double> xs) {
    long double m = 0.0L, m2 = 0.0L;
    std::size_t k = 0;
    for (const double x : xs) {
      ++k;
      const long double d = x - m;
      m += d / k;
      m2 += d * (x - m);
    }
    return std::pair<long double, long double>{m, m2 / (k - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  return (ma - mb) / std::sqrt(va / a.size() + vb / b.size());
}

} // namespace

TEST_CASE("pearson correlation") {
  SUBCASE("perfectly linear gives +1") {
    const std::vector<double> xs = {1, 2, 3, 4, 5};
    const std::vector<double> ys = {2, 4, 6, 8, 10};
    CHECK(pearson_correlation(xs, ys) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("anti-linear gives -1") {
    const std::vector<double> xs = {1, 2, 3};
    const std::vector<double> ys = {1, 0, -1};
    CHECK(pearson_correlation(xs, ys) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("textbook dataset matches the reference value") {
    const std::vector<double> xs = {43, 21, 25, 42, 57, 59};
    const std::vector<double> ys = {99, 65, 79, 75, 87, 81};
    CHECK(pearson_correlation(xs, ys) ==
          doctest::Approx(0.5298089018901743).epsilon(1e-12));
  }
  SUBCASE("constant column undefined") {
    const std::vector<double> xs = {1, 1, 1};
    const std::vector<double> ys = {1, 2, 3};
    CHECK_THROWS_AS(pearson_correlation(xs, ys), InvalidArgumentError);
    CHECK_THROWS_AS(pearson_correlation(ys, xs), InvalidArgumentError);
  }
  SUBCASE("needs at least 3 records") {
    const std::vector<double> xs = {1, 2};
    CHECK_THROWS_AS(pearson_correlation(xs, xs), InvalidArgumentError);
  }
}

TEST_CASE("welch t-test") {
  SUBCASE("identical groups: t = 0, p = 1") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const auto res = welch_t_test(a, a);
    CHECK(res.t == 0.0);
    CHECK(res.p == doctest::Approx(1.0));
  }
  SUBCASE("separated near-constant groups: p < 1e-6") {
    const std::vector<double> a = {0.0, 1e-9, -1e-9, 2e-9, 0.0};
    const std::vector<double> b = {1.0, 1.0 + 1e-9, 1.0 - 1e-9, 1.0, 1.0};
    const auto res = welch_t_test(a, b);
    CHECK(res.p < 1e-6);
  }
  SUBCASE("textbook example matches scipy to 1e-9") {
    const std::vector<double> a = {27.5, 21.0, 19.0, 23.6, 17.0, 17.9,
                                   16.9, 20.1, 21.9, 22.6, 23.1, 19.6};
    const std::vector<double> b = {27.1, 22.0, 20.8, 23.4, 23.4, 23.5,
                                   25.8, 22.0, 24.8, 20.2, 21.9, 22.1};
    const auto res = welch_t_test(a, b);
    CHECK(std::abs(res.t - (-2.089580194352092)) < 1e-9);
    CHECK(std::abs(res.dof - 18.93784260260507) < 1e-9);
    CHECK(std::abs(res.p - 0.05038771656613143) < 1e-9);
  }
  SUBCASE("fuzz: matches an independent implementation to 1e-9") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a, b;
      const int na = 3 + rng.uniform_int(40);
      const int nb = 3 + rng.uniform_int(40);
      for (int i = 0; i < na; ++i) a.push_back(rng.normal(1.0, 2.0));
      for (int i = 0; i < nb; ++i) b.push_back(rng.normal(0.5, 0.7));
      const auto res = welch_t_test(a, b);
      CHECK(std::abs(res.t - static_cast<double>(reference_welch_t(a, b))) <
            1e-9);
      CHECK(res.p >= 0.0);
      CHECK(res.p <= 1.0);
    }
  }
}

TEST_CASE("worst tail mean") {
  std::vector<double> gaps;
  for (int i = 1; i <= 100; ++i) gaps.push_back(i / 100.0);
  CHECK(worst_tail_mean(gaps, 1.0) == doctest::Approx(1.0));
  CHECK(worst_tail_mean(gaps, 10.0) == doctest::Approx(0.955));
  CHECK(worst_tail_mean(gaps, 100.0) == doctest::Approx(0.505));
  SUBCASE("ceil semantics for fractional tails") {
    const std::vector<double> five = {0.1, 0.5, 0.3, 0.2, 0.4};
    // ceil(0.001 * 5) = 1 element
    CHECK(worst_tail_mean(five, 0.1) == doctest::Approx(0.5));
    // ceil(0.3 * 5) = 2 elements
    CHECK(worst_tail_mean(five, 30.0) == doctest::Approx(0.45));
  }
  CHECK_THROWS_AS(worst_tail_mean({}, 1.0), InvalidArgumentError);
  CHECK_THROWS_AS(worst_tail_mean(gaps, 0.0), InvalidArgumentError);
}

TEST_CASE("pca projection") {
  SUBCASE("2d input reproduced up to rotation/reflection") {
    Rng rng(5);
    Matrix rows(40, 2);
    for (int i = 0; i < 40; ++i) {
      rows(i, 0) = rng.uniform(-2.0, 2.0);
      rows(i, 1) = rng.normal(0.0, 0.5);
    }
    const PcaResult res = pca_project(rows, 2);
    REQUIRE(res.projected.rows() == 40);
    for (int i = 0; i < 40; ++i) {
      for (int j = i + 1; j < 40; ++j) {
        const double orig = (rows.row(i) - rows.row(j)).norm();
        const double proj = (res.projected.row(i) - res.projected.row(j)).norm();
        CHECK(std::abs(orig - proj) < 1e-6);
      }
    }
  }
  SUBCASE("explained variance ratios descend and sum to <= 1") {
    Rng rng(6);
    Matrix rows(60, 5);
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 5; ++j)
        rows(i, j) = rng.normal(0.0, 1.0 + j);
    const PcaResult res = pca_project(rows, 3);
    CHECK(res.explained_variance_ratio[0] >= res.explained_variance_ratio[1]);
    CHECK(res.explained_variance_ratio[1] >= res.explained_variance_ratio[2]);
    double total = 0.0;
    for (const double r : res.explained_variance_ratio) total += r;
    CHECK(total <= 1.0 + 1e-12);
    CHECK(res.explained_variance_ratio[0] > 0.0);
  }
  SUBCASE("needs at least 3 samples") {
    Matrix rows(2, 2);
    rows << 0, 0, 1, 1;
    CHECK_THROWS_AS(pca_project(rows, 1), InvalidArgumentError);
  }
}

TEST_CASE("convex hull area") {
  SUBCASE("unit square") {
    const std::vector<Point> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(convex_hull_area(square) == doctest::Approx(1.0));
  }
  SUBCASE("interior points do not change the hull") {
    const std::vector<Point> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1},
                                    {0.5, 0.5}, {0.2, 0.7}};
    CHECK(convex_hull_area(pts) == doctest::Approx(1.0));
  }
  SUBCASE("degenerate sets have zero area") {
    CHECK(convex_hull_area(std::vector<Point>{{0, 0}, {1, 1}}) == 0.0);
    CHECK(convex_hull_area(std::vector<Point>{{0, 0}, {0.5, 0.5}, {1, 1}}) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("mean and sample stddev") {
  const std::vector<double> xs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(mean(xs) == doctest::Approx(5.0));
  CHECK(sample_stddev(xs) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK_THROWS_AS(sample_stddev(std::vector<double>{1.0}), InvalidArgumentError);
}
