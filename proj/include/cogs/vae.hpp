#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cogs/core.hpp"
#include "cogs/distributions.hpp"
#include "cogs/nn.hpp"

namespace cogs {

/// Sequence VAE hyperparameters. The decoder emits a fixed-length sequence
/// of n 2D points whose coordinates are squashed into [0,1] by a sigmoid.
struct VaeConfig {
  int n = 50;          // sequence length (points per instance)
  int latent_dim = 32;
  int hidden_dim = 128;

  static VaeConfig tiny() { return {6, 3, 12}; }
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static VaeConfig from_json(const nlohmann::json& j);
};

/// LSTM encoder -> Gaussian latent (mu, log-variance) -> LSTM decoder.
/// Training uses teacher forcing; generation feeds each emitted point back
/// as the next input.
struct VaeModel {
  VaeConfig config;
  ParamStore params;
  std::string version = "cogs-vae-v1";

  static VaeModel create(const VaeConfig& config, std::uint64_t seed);
};

/// Sort points ascending by x, ties ascending by y. A permutation of the
/// input multiset; idempotent.
std::vector<Point> canonicalize_sequence(const TspInstance& instance);

/// Closed-form KL(N(mu, diag(exp(logvar))) || N(0, I)), summed over
/// dimensions: 1/2 * sum(mu^2 + exp(lv) - 1 - lv). Always >= 0.
double gaussian_kl(std::span<const double> mu, std::span<const double> logvar);

/// Mean squared error over all coordinates of a batch (the reconstruction
/// term of the ELBO).
double reconstruction_mse(std::span<const std::vector<Point>> targets,
                          std::span<const std::vector<Point>> recons);

struct ElboResult {
  double loss = 0.0;
  double reconstruction = 0.0; // MSE over all coordinates
  double kl = 0.0;             // mean over batch of summed-dim KL
};

/// ELBO forward (and, when with_grad, backward into model.params, which is
/// zeroed first). Reparameterization noise depends only on (seed, batch
/// position), never on parameters. Sequences must share one length.
/// noise_scale multiplies the reparameterization noise: 0 trains the
/// deterministic autoencoder limit (z = mu), 1 the full VAE.
/// kl_floor_per_dim > 0 applies a free-bits floor: latent dimensions whose
/// per-instance KL sits below the floor stop contributing KL gradient (the
/// reported kl term is always the true KL).
ElboResult vae_elbo_loss(VaeModel& model,
                         std::span<const std::vector<Point>> sequences,
                         double kl_weight, std::uint64_t seed, bool with_grad,
                         double noise_scale = 1.0,
                         double kl_floor_per_dim = 0.0);

struct VaeEpochRow {
  int epoch = 0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double beta = 0.0;
};

struct VaeTrainConfig {
  int epochs = 30;
  int batch_size = 64;
  int batches_per_epoch = 8;
  double learning_rate = 1e-3;
  double grad_clip = 5.0;
  // Schedule: a deterministic warm phase (z = mu, beta = 0) so the decoder
  // sees an informative latent before any noise, then beta ramps linearly
  // to beta_final over the next beta_anneal_fraction of the epochs while
  // the reparameterization noise switches on.
  double deterministic_warm_fraction = 0.3;
  double beta_anneal_fraction = 0.2;
  double beta_final = 1.0;
  double free_bits = 0.05; // per-dim KL floor during training
};

/// Train on fresh clustered-uniform (or other configured) batches each
/// epoch. Deterministic given the seed; epochs = 0 leaves the model
/// untouched and returns an empty history.
std::vector<VaeEpochRow> train_vae(VaeModel& model,
                                   const GeneratorConfig& generator,
                                   const VaeTrainConfig& train,
                                   std::uint64_t seed);

/// Decode `count` instances from z ~ N(0, I). Coordinates land in [0,1]
/// by construction.
std::vector<TspInstance> sample_instances(const VaeModel& model, int count,
                                          std::uint64_t seed);

/// Decode a single latent vector (no noise), e.g. the prior mean z = 0.
TspInstance decode_latent(const VaeModel& model,
                          const Eigen::VectorXd& latent);

/// Posterior mean of one instance (canonicalized internally).
Eigen::VectorXd encode_mean(const VaeModel& model, const TspInstance& instance);

struct LatentProjection {
  std::vector<std::string> labels;          // one per row
  Matrix coordinates;                       // rows x 2
  std::vector<double> explained_variance_ratio; // descending, sums to <= 1
};

/// Encode every instance of every labeled dataset to its posterior mean,
/// fit a 2-component PCA on the pooled means, and return the projected
/// coordinates. Requires at least 3 instances in total.
LatentProjection latent_pca_projection(
    const VaeModel& model,
    std::span<const std::pair<std::string, std::vector<TspInstance>>> datasets);

void save_vae(const std::filesystem::path& path, const VaeModel& model,
              std::int64_t epoch = 0, const std::string& rng_state = "");

struct LoadedVae {
  VaeModel model;
  std::int64_t epoch = 0;
  std::string rng_state;
};

LoadedVae load_vae(const std::filesystem::path& path);

} // namespace cogs
