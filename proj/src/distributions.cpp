#include "cogs/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "cogs/errors.hpp"
#include "cogs/rng.hpp"

namespace cogs {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::uniform: return "uniform";
    case GeneratorKind::gaussian_mixture: return "gaussian_mixture";
    case GeneratorKind::diagonal: return "diagonal";
    case GeneratorKind::clustered_uniform: return "clustered_uniform";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "uniform") return GeneratorKind::uniform;
  if (name == "gaussian_mixture") return GeneratorKind::gaussian_mixture;
  if (name == "diagonal") return GeneratorKind::diagonal;
  if (name == "clustered_uniform") return GeneratorKind::clustered_uniform;
  throw InvalidArgumentError("unknown generator kind: " + name);
}

void GeneratorConfig::validate() const {
  if (n < 2) throw InvalidArgumentError("generator: n must be >= 2");
  if (gm_modes_min < 1 || gm_modes_max < gm_modes_min)
    throw InvalidArgumentError("generator: bad gaussian mixture mode range");
  if (!(gm_spread > 0.0))
    throw InvalidArgumentError("generator: gm_spread must be > 0");
  if (!(diag_band_width > 0.0 && diag_band_width < 1.0))
    throw InvalidArgumentError("generator: band_width must be in (0,1)");
  if (diag_jitter < 0.0)
    throw InvalidArgumentError("generator: jitter must be >= 0");
  if (cu_max_clusters < 1)
    throw InvalidArgumentError("generator: max_clusters must be >= 1");
  if (!(cu_radius_min > 0.0 && cu_radius_max >= cu_radius_min))
    throw InvalidArgumentError("generator: bad cluster radius range");
  if (cu_uniform_prob < 0.0 || cu_uniform_prob > 1.0)
    throw InvalidArgumentError("generator: uniform_prob must be in [0,1]");
}

TspInstance sample_uniform(int n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgumentError("sample_uniform: n must be >= 2");
  Rng rng(seed);
  TspInstance out;
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    out.points.push_back({x, y});
  }
  return out;
}

TspInstance sample_gaussian_mixture(int n, int num_modes, double spread,
                                    std::uint64_t seed, double extent) {
  if (n < 2) throw InvalidArgumentError("sample_gaussian_mixture: n must be >= 2");
  if (num_modes < 1)
    throw InvalidArgumentError("sample_gaussian_mixture: num_modes must be >= 1");
  if (!(spread > 0.0))
    throw InvalidArgumentError("sample_gaussian_mixture: spread must be > 0");
  Rng rng(seed);
  std::vector<Point> centers(num_modes);
  for (auto& c : centers) {
    c.x = rng.uniform(0.0, extent);
    c.y = rng.uniform(0.0, extent);
  }
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    const auto& c = centers[rng.uniform_int(num_modes)];
    p.x = c.x + rng.normal() * spread;
    p.y = c.y + rng.normal() * spread;
  }
  return normalize_to_unit_square(pts);
}

TspInstance sample_diagonal(int n, double band_width, double jitter,
                            std::uint64_t seed) {
  if (n < 2) throw InvalidArgumentError("sample_diagonal: n must be >= 2");
  if (!(band_width > 0.0 && band_width < 1.0))
    throw InvalidArgumentError("sample_diagonal: band_width must be in (0,1)");
  Rng rng(seed);
  // Perpendicular direction to the main diagonal.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    const double t = rng.uniform();
    const double off = rng.uniform(-band_width / 2.0, band_width / 2.0);
    double x = t - off * inv_sqrt2;
    double y = t + off * inv_sqrt2;
    if (jitter > 0.0) {
      x += rng.normal() * jitter;
      y += rng.normal() * jitter;
    }
    p.x = clamp01(x);
    p.y = clamp01(y);
  }
  return normalize_to_unit_square(pts);
}

TspInstance sample_clustered_uniform(int n, int max_clusters,
                                     double radius_min, double radius_max,
                                     double uniform_prob, std::uint64_t seed) {
  if (n < 2)
    throw InvalidArgumentError("sample_clustered_uniform: n must be >= 2");
  if (max_clusters < 1)
    throw InvalidArgumentError("sample_clustered_uniform: max_clusters must be >= 1");
  // The uniform branch replays sample_uniform's exact seed path so that
  // uniform_prob = 1 is indistinguishable from sample_uniform.
  Rng branch(derive_seed(seed, "cu.uniform_branch"));
  if (branch.uniform() < uniform_prob) return sample_uniform(n, seed);

  Rng rng(derive_seed(seed, "cu.body"));
  const int k = 1 + rng.uniform_int(max_clusters);
  std::vector<Point> centers(k);
  std::vector<double> radius(k);
  for (int c = 0; c < k; ++c) {
    centers[c].x = rng.uniform();
    centers[c].y = rng.uniform();
    radius[c] = rng.uniform(radius_min, radius_max);
  }
  TspInstance out;
  out.points.resize(n);
  for (auto& p : out.points) {
    const int c = rng.uniform_int(k);
    p.x = clamp01(centers[c].x + rng.uniform(-radius[c], radius[c]));
    p.y = clamp01(centers[c].y + rng.uniform(-radius[c], radius[c]));
  }
  return out;
}

TspInstance generate_instance(const GeneratorConfig& config,
                              std::uint64_t master_seed, std::uint64_t index) {
  config.validate();
  const std::string label = "gen." + to_string(config.kind);
  const std::uint64_t seed = derive_seed(master_seed, label, index);
  switch (config.kind) {
    case GeneratorKind::uniform:
      return sample_uniform(config.n, seed);
    case GeneratorKind::gaussian_mixture: {
      Rng modes(derive_seed(master_seed, "gen.gm.modes", index));
      const int num_modes =
          config.gm_modes_min +
          modes.uniform_int(config.gm_modes_max - config.gm_modes_min + 1);
      return sample_gaussian_mixture(config.n, num_modes, config.gm_spread,
                                     seed, config.gm_extent);
    }
    case GeneratorKind::diagonal:
      return sample_diagonal(config.n, config.diag_band_width,
                             config.diag_jitter, seed);
    case GeneratorKind::clustered_uniform:
      return sample_clustered_uniform(config.n, config.cu_max_clusters,
                                      config.cu_radius_min, config.cu_radius_max,
                                      config.cu_uniform_prob, seed);
  }
  throw InvalidArgumentError("generate_instance: unknown kind");
}

std::vector<TspInstance> generate_dataset(const GeneratorConfig& config,
                                          int count, std::uint64_t master_seed) {
  if (count < 0) throw InvalidArgumentError("generate_dataset: negative count");
  std::vector<TspInstance> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = generate_instance(config, master_seed, i);
  return out;
}

} // namespace cogs
