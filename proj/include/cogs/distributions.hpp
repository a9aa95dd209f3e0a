#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/core.hpp"

namespace cogs {

enum class GeneratorKind { uniform, gaussian_mixture, diagonal, clustered_uniform };

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

/// Parameters for the synthetic instance generators. Defaults are the
/// artifact's recorded values and are written into dataset manifests.
struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::uniform;
  int n = 50;

  // gaussian_mixture: number of modes drawn uniformly from
  // [gm_modes_min, gm_modes_max] per instance, centers in a working square
  // of side gm_extent, isotropic noise with stddev gm_spread.
  int gm_modes_min = 2;
  int gm_modes_max = 6;
  double gm_extent = 3.0;
  double gm_spread = 0.1;

  // diagonal
  double diag_band_width = 0.1;
  double diag_jitter = 0.02;

  // clustered_uniform
  int cu_max_clusters = 8;
  double cu_radius_min = 0.05;
  double cu_radius_max = 0.25;
  double cu_uniform_prob = 0.2;

  void validate() const;
};

/// n i.i.d. points uniform on [0,1]^2.
TspInstance sample_uniform(int n, std::uint64_t seed);

/// `num_modes` centers uniform in a working square of side `extent`; each
/// point picks a center uniformly and adds isotropic Gaussian noise with
/// stddev `spread` (> 0), then the cloud is normalized into the unit square.
TspInstance sample_gaussian_mixture(int n, int num_modes, double spread,
                                    std::uint64_t seed, double extent = 3.0);

/// Points along the main diagonal y = x with a perpendicular uniform offset
/// of total width `band_width` plus isotropic Gaussian jitter, clamped to
/// the unit square and normalized.
TspInstance sample_diagonal(int n, double band_width, double jitter,
                            std::uint64_t seed);

/// Uniform clusters of variable size. With probability `uniform_prob` the
/// all-singleton special case is emitted, which is exactly sample_uniform
/// on the same seed. Otherwise k ~ U{1..max_clusters} clusters are drawn
/// with per-cluster radius uniform in [radius_min, radius_max], points are
/// partitioned uniformly among clusters and placed uniformly in the square
/// of side 2*radius around their center, clamped to [0,1]^2.
TspInstance sample_clustered_uniform(int n, int max_clusters,
                                     double radius_min, double radius_max,
                                     double uniform_prob, std::uint64_t seed);

/// Dispatch on config.kind with per-instance derived seeds
/// (label "gen.<kind>", index). Instance i of a dataset depends only on
/// (master_seed, i), so generation parallelizes safely.
TspInstance generate_instance(const GeneratorConfig& config,
                              std::uint64_t master_seed, std::uint64_t index);

std::vector<TspInstance> generate_dataset(const GeneratorConfig& config,
                                          int count, std::uint64_t master_seed);

} // namespace cogs
