#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cogs/errors.hpp"
#include "cogs/hac.hpp"
#include "cogs/oracle.hpp"
#include "test_util.hpp"

using namespace cogs;

namespace {

std::vector<TspInstance> uniform_batch(int count, int n, std::uint64_t seed) {
  std::vector<TspInstance> out;
  for (int i = 0; i < count; ++i)
    out.push_back(test::random_uniform_instance(n, seed + i));
  return out;
}

// Fixed-tour hardness value, written independently of the library gradient.
double fixed_tour_hardness(const TspInstance& inst,
                           std::span<const int> model_order,
                           std::span<const int> surrogate_order) {
  const double cm = tour_length(inst, model_order);
  const double cs = tour_length(inst, surrogate_order);
  return (cm - cs) / cs;
}

} // namespace

TEST_CASE("hardness") {
  const SolverPolicy policy = SolverPolicy::create(PolicyConfig::tiny(), 1);
  SUBCASE("model equal to surrogate gives zero") {
    const auto batch = uniform_batch(4, 8, 10);
    const Surrogate self = Surrogate::from_baseline(policy);
    const auto scores = hardness(policy, self, batch);
    for (const double s : scores) CHECK(s == 0.0);
  }
  SUBCASE("arithmetic") {
    CHECK((12.0 - 10.0) / 10.0 == doctest::Approx(0.2));
  }
  SUBCASE("untrained policy vs local search is positive on average") {
    const auto batch = uniform_batch(100, 20, 200);
    const Surrogate ls = Surrogate::from_local_search(5, 3);
    const auto scores = hardness(policy, ls, batch);
    double total = 0.0;
    for (const double s : scores) total += s;
    CHECK(total / scores.size() > 0.0);
  }
}

TEST_CASE("tour length coordinate gradient") {
  const auto inst = test::random_uniform_instance(9, 5);
  const auto res = local_search_oracle(inst, 3, 7);
  const auto grad = tour_length_coordinate_grad(inst, res.tour.order);

  // Finite differences on the tour length with the tour held fixed.
  TspInstance probe = inst;
  Rng pick(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = pick.uniform_int(inst.n());
    const bool on_x = pick.uniform() < 0.5;
    const double h = 1e-7;
    double& coord = on_x ? probe.points[p].x : probe.points[p].y;
    const double saved = coord;
    coord = saved + h;
    const double up = tour_length(probe, res.tour.order);
    coord = saved - h;
    const double down = tour_length(probe, res.tour.order);
    coord = saved;
    const double fd = (up - down) / (2.0 * h);
    const double analytic = on_x ? grad[p].x : grad[p].y;
    CHECK(test::rel_err(analytic, fd, 1e-9) < 1e-4);
  }

  SUBCASE("zero-length edges give zero subgradient") {
    const auto dup = test::instance_from({{0.5, 0.5}, {0.5, 0.5}, {0.9, 0.1}});
    const std::vector<int> order = {0, 1, 2};
    const auto g = tour_length_coordinate_grad(dup, order);
    CHECK(std::isfinite(g[0].x));
    CHECK(std::isfinite(g[1].y));
  }
}

TEST_CASE("hardness coordinate gradient matches finite differences") {
  const SolverPolicy policy = SolverPolicy::create(PolicyConfig::tiny(), 2);
  const auto batch = uniform_batch(8, 10, 50);
  const Surrogate ls = Surrogate::from_local_search(5, 11);
  for (const auto& inst : batch) {
    const Tour model_tour = greedy_decode(policy, std::span(&inst, 1))[0].tour;
    const Tour surrogate_tour = ls.solve(inst);
    const auto grad = hardness_coordinate_grad(inst, model_tour, surrogate_tour);

    TspInstance probe = inst;
    Rng pick(inst.points[0].x * 1e6);
    for (int trial = 0; trial < 4; ++trial) {
      const int p = pick.uniform_int(inst.n());
      const bool on_x = pick.uniform() < 0.5;
      const double h = 1e-6;
      double& coord = on_x ? probe.points[p].x : probe.points[p].y;
      const double saved = coord;
      coord = saved + h;
      const double up =
          fixed_tour_hardness(probe, model_tour.order, surrogate_tour.order);
      coord = saved - h;
      const double down =
          fixed_tour_hardness(probe, model_tour.order, surrogate_tour.order);
      coord = saved;
      const double fd = (up - down) / (2.0 * h);
      const double analytic = on_x ? grad[p].x : grad[p].y;
      CHECK(test::rel_err(analytic, fd, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("hac_step") {
  const SolverPolicy policy = SolverPolicy::create(PolicyConfig::tiny(), 3);
  const SolverPolicy other = SolverPolicy::create(PolicyConfig::tiny(), 4);
  const Surrogate surrogate = Surrogate::from_baseline(other);
  const auto batch = uniform_batch(16, 10, 300);

  SUBCASE("eta = 0 is the identity") {
    HacConfig config;
    config.eta = 0.0;
    const auto out = hac_step(policy, surrogate, batch, config);
    for (std::size_t i = 0; i < batch.size(); ++i)
      for (int p = 0; p < batch[i].n(); ++p) {
        CHECK(out[i].points[p].x == batch[i].points[p].x);
        CHECK(out[i].points[p].y == batch[i].points[p].y);
      }
  }
  SUBCASE("clamp invariant holds for large steps") {
    HacConfig config;
    config.eta = 50.0;
    const auto out = hac_step(policy, surrogate, batch, config);
    for (const auto& inst : out) validate_instance(inst);
  }
  SUBCASE("multi-step ascent stays in bounds") {
    HacConfig config;
    config.eta = 0.5;
    config.ascent_steps = 3;
    const auto out = hac_step(policy, surrogate, batch, config);
    for (const auto& inst : out) validate_instance(inst);
  }
}

TEST_CASE("gradient magnitude stats") {
  const SolverPolicy policy = SolverPolicy::create(PolicyConfig::tiny(), 5);
  const SolverPolicy other = SolverPolicy::create(PolicyConfig::tiny(), 6);
  const Surrogate surrogate = Surrogate::from_baseline(other);
  const auto batch = uniform_batch(32, 10, 400);

  HacConfig config;
  config.eta = 1.0;
  const auto base = gradient_magnitude_stats(policy, surrogate, batch, config);
  CHECK(base.mean >= 0.0);
  CHECK(base.median >= 0.0);
  CHECK(base.mean >= base.median); // heavy-tailed magnitudes

  SUBCASE("eta = 0 gives zeros") {
    HacConfig zero = config;
    zero.eta = 0.0;
    const auto stats = gradient_magnitude_stats(policy, surrogate, batch, zero);
    CHECK(stats.mean == 0.0);
    CHECK(stats.median == 0.0);
  }
  SUBCASE("doubling eta doubles both statistics") {
    HacConfig twice = config;
    twice.eta = 2.0;
    const auto stats = gradient_magnitude_stats(policy, surrogate, batch, twice);
    CHECK(stats.mean == doctest::Approx(2.0 * base.mean).epsilon(1e-12));
    CHECK(stats.median == doctest::Approx(2.0 * base.median).epsilon(1e-12));
  }
}

TEST_CASE("reweight") {
  SUBCASE("equal scores give weights of exactly one") {
    const std::vector<double> scores(7, 0.42);
    for (const double w : reweight(scores, 0.5)) CHECK(w == 1.0);
  }
  SUBCASE("large temperature flattens toward one") {
    const std::vector<double> scores = {-1.0, 0.0, 2.0, 5.0};
    for (const double w : reweight(scores, 1e9))
      CHECK(w == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("strictly larger score gets strictly larger weight (fuzz)") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int b = 2 + rng.uniform_int(30);
      std::vector<double> scores(b);
      for (auto& s : scores) s = rng.normal(0.0, 2.0);
      const auto weights = reweight(scores, 0.5);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j)
          if (scores[i] > scores[j]) CHECK(weights[i] > weights[j]);
    }
  }
  SUBCASE("weights sum to the batch size") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const int b = 2 + rng.uniform_int(50);
      std::vector<double> scores(b);
      for (auto& s : scores) s = rng.normal(0.0, 1.0);
      const auto weights = reweight(scores, 0.7);
      double total = 0.0;
      for (const double w : weights) total += w;
      CHECK(total == doctest::Approx(b).epsilon(1e-9));
    }
  }
  SUBCASE("permutation equivariance") {
    const std::vector<double> scores = {0.3, -0.2, 1.7, 0.0, 0.9};
    const auto w = reweight(scores, 0.5);
    std::vector<double> rotated(scores.rbegin(), scores.rend());
    const auto w2 = reweight(rotated, 0.5);
    for (std::size_t i = 0; i < scores.size(); ++i)
      CHECK(w[i] == doctest::Approx(w2[scores.size() - 1 - i]).epsilon(1e-12));
  }
}

TEST_CASE("gap size correlation") {
  SUBCASE("perfectly linear") {
    const std::vector<std::pair<double, double>> records = {
        {10, 0.01}, {20, 0.02}, {30, 0.03}, {40, 0.04}};
    CHECK(gap_size_correlation(records) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("anti-linear") {
    const std::vector<std::pair<double, double>> records = {
        {1, 1.0}, {2, 0.0}, {3, -1.0}};
    CHECK(gap_size_correlation(records) ==
          doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("constant column rejected") {
    const std::vector<std::pair<double, double>> records = {
        {1, 0.5}, {2, 0.5}, {3, 0.5}};
    CHECK_THROWS_AS(gap_size_correlation(records), InvalidArgumentError);
  }
}
