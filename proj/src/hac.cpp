#include "cogs/hac.hpp"

#include <algorithm>
#include <cmath>

#include "cogs/errors.hpp"
#include "cogs/oracle.hpp"
#include "cogs/stats.hpp"

namespace cogs {

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::rollout_baseline: return "rollout_baseline";
    case SurrogateKind::local_search: return "local_search";
  }
  return "unknown";
}

SurrogateKind surrogate_kind_from_string(const std::string& name) {
  if (name == "rollout_baseline") return SurrogateKind::rollout_baseline;
  if (name == "local_search") return SurrogateKind::local_search;
  throw InvalidArgumentError("unknown surrogate kind: " + name);
}

Surrogate Surrogate::from_baseline(const SolverPolicy& policy) {
  Surrogate s;
  s.kind = SurrogateKind::rollout_baseline;
  s.baseline = &policy;
  return s;
}

Surrogate Surrogate::from_local_search(int restarts, std::uint64_t seed) {
  Surrogate s;
  s.kind = SurrogateKind::local_search;
  s.restarts = restarts;
  s.seed = seed;
  return s;
}

Tour Surrogate::solve(const TspInstance& instance) const {
  if (kind == SurrogateKind::rollout_baseline) {
    if (baseline == nullptr)
      throw InvalidArgumentError("surrogate: rollout baseline not set");
    return greedy_decode(*baseline, std::span(&instance, 1))[0].tour;
  }
  return local_search_oracle(instance, restarts, seed).tour;
}

std::vector<double> hardness(const SolverPolicy& policy,
                             const Surrogate& surrogate,
                             std::span<const TspInstance> batch) {
  const std::vector<DecodeResult> model_tours = greedy_decode(policy, batch);
  std::vector<double> scores(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double surrogate_cost = surrogate.solve(batch[i]).length;
    if (!(surrogate_cost > 0.0))
      throw DegenerateInputError(
          "hardness: surrogate cost is zero (all points coincide)");
    scores[i] = (model_tours[i].tour.length - surrogate_cost) / surrogate_cost;
  }
  return scores;
}

std::vector<Point> tour_length_coordinate_grad(const TspInstance& instance,
                                               std::span<const int> order) {
  const int n = instance.n();
  if (!is_permutation_of_n(order, n))
    throw InvalidArgumentError("tour gradient: not a permutation");
  std::vector<Point> grad(n, Point{0.0, 0.0});
  for (int i = 0; i < n; ++i) {
    const int a = order[i];
    const int b = order[(i + 1) % n];
    const Point& pa = instance.points[a];
    const Point& pb = instance.points[b];
    const double d = euclidean(pa, pb);
    if (d <= 0.0) continue; // zero-length edge: zero subgradient
    const double ux = (pa.x - pb.x) / d;
    const double uy = (pa.y - pb.y) / d;
    grad[a].x += ux;
    grad[a].y += uy;
    grad[b].x -= ux;
    grad[b].y -= uy;
  }
  return grad;
}

std::vector<Point> hardness_coordinate_grad(const TspInstance& instance,
                                            const Tour& model_tour,
                                            const Tour& surrogate_tour) {
  const double surrogate_cost = surrogate_tour.length;
  if (!(surrogate_cost > 0.0))
    throw DegenerateInputError("hardness gradient: surrogate cost is zero");
  const std::vector<Point> g_model =
      tour_length_coordinate_grad(instance, model_tour.order);
  const std::vector<Point> g_surr =
      tour_length_coordinate_grad(instance, surrogate_tour.order);
  // H = (Cm - Cs) / Cs  =>  dH = dCm / Cs - (Cm / Cs^2) dCs.
  const double ratio = model_tour.length / (surrogate_cost * surrogate_cost);
  std::vector<Point> grad(instance.n());
  for (int i = 0; i < instance.n(); ++i) {
    grad[i].x = g_model[i].x / surrogate_cost - ratio * g_surr[i].x;
    grad[i].y = g_model[i].y / surrogate_cost - ratio * g_surr[i].y;
  }
  return grad;
}

std::vector<TspInstance> hac_step(const SolverPolicy& policy,
                                  const Surrogate& surrogate,
                                  std::span<const TspInstance> batch,
                                  const HacConfig& config) {
  if (!(config.eta >= 0.0))
    throw InvalidArgumentError("hac_step: eta must be >= 0");
  if (config.ascent_steps < 1)
    throw InvalidArgumentError("hac_step: ascent_steps must be >= 1");

  std::vector<TspInstance> current(batch.begin(), batch.end());
  for (int step = 0; step < config.ascent_steps; ++step) {
    const std::vector<DecodeResult> model_tours = greedy_decode(policy, current);
    for (std::size_t i = 0; i < current.size(); ++i) {
      const Tour surrogate_tour = surrogate.solve(current[i]);
      const std::vector<Point> grad = hardness_coordinate_grad(
          current[i], model_tours[i].tour, surrogate_tour);
      for (int p = 0; p < current[i].n(); ++p) {
        const double gx = config.eta * grad[p].x;
        const double gy = config.eta * grad[p].y;
        if (!std::isfinite(gx) || !std::isfinite(gy))
          throw NumericalFailureError("hac_step: non-finite gradient at instance " +
                                      std::to_string(i));
        current[i].points[p].x = std::clamp(current[i].points[p].x + gx, 0.0, 1.0);
        current[i].points[p].y = std::clamp(current[i].points[p].y + gy, 0.0, 1.0);
      }
    }
  }
  return current;
}

GradientMagnitudeStats gradient_magnitude_stats(const SolverPolicy& policy,
                                                const Surrogate& surrogate,
                                                std::span<const TspInstance> batch,
                                                const HacConfig& config) {
  const std::vector<DecodeResult> model_tours = greedy_decode(policy, batch);
  std::vector<double> magnitudes;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Tour surrogate_tour = surrogate.solve(batch[i]);
    const std::vector<Point> grad = hardness_coordinate_grad(
        batch[i], model_tours[i].tour, surrogate_tour);
    for (const Point& g : grad) {
      magnitudes.push_back(std::abs(config.eta * g.x));
      magnitudes.push_back(std::abs(config.eta * g.y));
    }
  }
  GradientMagnitudeStats stats;
  double total = 0.0;
  for (const double m : magnitudes) total += m;
  stats.mean = total / static_cast<double>(magnitudes.size());
  const std::size_t mid = magnitudes.size() / 2;
  std::nth_element(magnitudes.begin(), magnitudes.begin() + mid,
                   magnitudes.end());
  if (magnitudes.size() % 2 == 1) {
    stats.median = magnitudes[mid];
  } else {
    const double hi = magnitudes[mid];
    std::nth_element(magnitudes.begin(), magnitudes.begin() + mid - 1,
                     magnitudes.end());
    stats.median = 0.5 * (magnitudes[mid - 1] + hi);
  }
  return stats;
}

std::vector<double> reweight(std::span<const double> hardness_scores,
                             double tau) {
  if (hardness_scores.empty())
    throw InvalidArgumentError("reweight: empty score batch");
  if (!(tau > 0.0)) throw InvalidArgumentError("reweight: tau must be > 0");
  for (const double s : hardness_scores)
    if (!std::isfinite(s))
      throw InvalidArgumentError("reweight: non-finite hardness score");
  const double mx = *std::max_element(hardness_scores.begin(),
                                      hardness_scores.end());
  std::vector<double> weights(hardness_scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = std::exp((hardness_scores[i] - mx) / tau);
    total += weights[i];
  }
  const double scale = static_cast<double>(weights.size()) / total;
  for (double& w : weights) w *= scale;
  return weights;
}

double gap_size_correlation(
    std::span<const std::pair<double, double>> records) {
  std::vector<double> sizes(records.size());
  std::vector<double> gaps(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    sizes[i] = records[i].first;
    gaps[i] = records[i].second;
  }
  return pearson_correlation(sizes, gaps);
}

} // namespace cogs
