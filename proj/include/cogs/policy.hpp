#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogs/core.hpp"
#include "cogs/nn.hpp"
#include "cogs/rng.hpp"

namespace cogs {

/// Attention solver hyperparameters. Defaults are the desk-scale profile;
/// tiny() is the profile used by gradient checks.
struct PolicyConfig {
  int embed_dim = 128;
  int num_layers = 3;
  int num_heads = 8;
  int ffn_dim = 512;
  double logit_clip = 10.0;

  static PolicyConfig tiny() { return {8, 1, 2, 32, 10.0}; }
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static PolicyConfig from_json(const nlohmann::json& j);
};

/// Encoder-decoder policy over TSP instances: a multi-head self-attention
/// encoder with feed-forward blocks and layer normalization, and a
/// context-attention decoder with visited masking.
///
/// The decoder fixes the start node at index 0 (tours are rotation
/// invariant); step 0 is a probability-one selection and contributes
/// log p = 0, so every decode performs exactly n selection steps.
struct SolverPolicy {
  PolicyConfig config;
  ParamStore params;
  std::string version = "cogs-policy-v1";

  static SolverPolicy create(const PolicyConfig& config, std::uint64_t seed);
};

enum class DecodeMode { greedy, sample };

struct DecodeResult {
  Tour tour;
  double log_probability = 0.0; // sum of per-step log selection probabilities
};

/// Per-instance encoder output.
struct Encoded {
  Matrix node_embeddings;             // n x d
  Eigen::RowVectorXd graph_embedding; // mean of the node embeddings
};

/// Encode a batch. All instances must have the same size.
std::vector<Encoded> encode(const SolverPolicy& policy,
                            std::span<const TspInstance> batch);

/// Decode one instance from its encoder output.
DecodeResult decode(const SolverPolicy& policy, const TspInstance& instance,
                    const Encoded& encoded, DecodeMode mode, Rng* rng);

/// Greedy-decode a batch (deterministic given parameters).
std::vector<DecodeResult> greedy_decode(const SolverPolicy& policy,
                                        std::span<const TspInstance> batch);

/// Sample one tour per instance from the policy's step-wise softmax.
std::vector<DecodeResult> sample_decode(const SolverPolicy& policy,
                                        std::span<const TspInstance> batch,
                                        Rng& rng);

/// log p_theta(order | instance), teacher-forcing the given tour through
/// the decoder. Matches the log_probability reported by decode for the
/// same order.
double log_probability(const SolverPolicy& policy, const TspInstance& instance,
                       std::span<const int> order);

/// Accumulate coef * d(log p_theta(order | instance))/d(theta) into
/// policy.params grads. The building block of the REINFORCE gradient.
void accumulate_logprob_grad(SolverPolicy& policy, const TspInstance& instance,
                             std::span<const int> order, double coef);

struct ReinforceStats {
  double loss = 0.0;            // mean weighted sampled tour cost
  double mean_advantage = 0.0;  // mean (sampled - baseline greedy) cost
  double grad_norm = 0.0;       // pre-clip gradient norm
  std::vector<DecodeResult> sampled;
  std::vector<double> baseline_costs;
};

/// One REINFORCE evaluation: sample a tour per instance, greedy-roll the
/// baseline, and accumulate the advantage-weighted log-prob gradient
/// (weights default to 1; the curriculum passes softmax re-weights).
/// Existing gradients in `policy` are cleared first.
ReinforceStats reinforce_loss(SolverPolicy& policy, const SolverPolicy& baseline,
                              std::span<const TspInstance> batch,
                              std::span<const double> weights,
                              std::uint64_t seed);

/// Same, with the baseline's greedy costs supplied by the caller (the
/// training loop computes them for the hardness scores anyway).
ReinforceStats reinforce_loss_with_costs(SolverPolicy& policy,
                                         std::span<const TspInstance> batch,
                                         std::span<const double> baseline_costs,
                                         std::span<const double> weights,
                                         std::uint64_t seed);

/// Frozen rollout baseline: a copy of an accepted policy, replaced only
/// wholesale when the live policy beats it on the validation set.
struct RolloutBaseline {
  SolverPolicy policy;
  double validation_cost = 0.0; // mean greedy cost on the accepted set
};

struct BaselineDecision {
  bool replaced = false;
  double policy_cost = 0.0;
  double baseline_cost = 0.0;
};

double mean_greedy_cost(const SolverPolicy& policy,
                        std::span<const TspInstance> dataset);

/// Replace the baseline with a frozen copy of `policy` iff the policy's
/// mean greedy cost on `validation` is strictly lower than the baseline's.
BaselineDecision maybe_update_baseline(const SolverPolicy& policy,
                                       RolloutBaseline& baseline,
                                       std::span<const TspInstance> validation);

void save_policy(const std::filesystem::path& path, const SolverPolicy& policy,
                 std::int64_t epoch = 0, const std::string& rng_state = "");

struct LoadedPolicy {
  SolverPolicy policy;
  std::int64_t epoch = 0;
  std::string rng_state;
};

LoadedPolicy load_policy(const std::filesystem::path& path);

} // namespace cogs
