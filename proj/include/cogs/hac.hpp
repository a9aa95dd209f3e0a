#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cogs/core.hpp"
#include "cogs/policy.hpp"

namespace cogs {

enum class SurrogateKind { rollout_baseline, local_search };

std::string to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& name);

/// Hardness-adaptive curriculum parameters.
struct HacConfig {
  double eta = 1.0;  // ascent step size
  double tau = 0.5;  // re-weighting temperature
  SurrogateKind surrogate = SurrogateKind::rollout_baseline;
  int ascent_steps = 1;
  int local_search_restarts = 10; // used by the local_search surrogate
  std::uint64_t local_search_seed = 0;
};

/// The surrogate solver M': either the frozen rollout baseline (free, and
/// tracks model strength) or the local-search oracle (diagnostics).
struct Surrogate {
  SurrogateKind kind = SurrogateKind::rollout_baseline;
  const SolverPolicy* baseline = nullptr;
  int restarts = 10;
  std::uint64_t seed = 0;

  static Surrogate from_baseline(const SolverPolicy& policy);
  static Surrogate from_local_search(int restarts, std::uint64_t seed);

  Tour solve(const TspInstance& instance) const;
};

/// Per-instance hardness (C_M - C_M') / C_M' with C_M the model's greedy
/// tour cost. Throws DegenerateInputError when the surrogate cost is zero
/// (all points coincide).
std::vector<double> hardness(const SolverPolicy& policy,
                             const Surrogate& surrogate,
                             std::span<const TspInstance> batch);

/// Gradient of the closed-tour length with respect to the coordinates,
/// holding the tour fixed (sum of unit vectors toward each neighbor;
/// zero-length edges contribute a zero subgradient).
std::vector<Point> tour_length_coordinate_grad(const TspInstance& instance,
                                               std::span<const int> order);

/// Gradient of the fixed-tour hardness expression with respect to the
/// instance coordinates, given both decoded tours.
std::vector<Point> hardness_coordinate_grad(const TspInstance& instance,
                                            const Tour& model_tour,
                                            const Tour& surrogate_tour);

/// One (or config.ascent_steps) gradient-ascent steps on the coordinates:
/// decode both tours, freeze them, step X <- clamp(X + eta * grad H).
std::vector<TspInstance> hac_step(const SolverPolicy& policy,
                                  const Surrogate& surrogate,
                                  std::span<const TspInstance> batch,
                                  const HacConfig& config);

struct GradientMagnitudeStats {
  double mean = 0.0;
  double median = 0.0;
};

/// Mean and median of the elementwise |eta * grad H| over the whole batch
/// (the statistics the preliminary study reports).
GradientMagnitudeStats gradient_magnitude_stats(const SolverPolicy& policy,
                                                const Surrogate& surrogate,
                                                std::span<const TspInstance> batch,
                                                const HacConfig& config);

/// Batch re-weighting: B * softmax(scores / tau). Mean weight is exactly 1,
/// monotone in the score.
std::vector<double> reweight(std::span<const double> hardness_scores,
                             double tau);

/// Pearson correlation between instance size and gap over (size, gap)
/// records, as in the preliminary study's size-correlation figure.
double gap_size_correlation(std::span<const std::pair<double, double>> records);

} // namespace cogs
