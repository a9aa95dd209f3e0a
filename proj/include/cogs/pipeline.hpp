#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogs/core.hpp"
#include "cogs/distributions.hpp"
#include "cogs/hac.hpp"
#include "cogs/oracle.hpp"
#include "cogs/policy.hpp"
#include "cogs/stats.hpp"
#include "cogs/vae.hpp"

namespace cogs {

enum class TrainingMode { uniform, hac, cogs, cogs_no_hac, no_vae };

std::string to_string(TrainingMode mode);
TrainingMode training_mode_from_string(const std::string& name);

/// Reference-cost source for evaluation.
struct OracleChoice {
  OracleMethod method = OracleMethod::local_search;
  int restarts = 50; // local_search only
  std::uint64_t seed = 0;
  int held_karp_cap = kHeldKarpMaxN;
};

/// Per-instance reference costs. `threads` > 1 fans instances out across
/// workers; results are written by index, so the output is identical for
/// any thread count.
std::vector<double> compute_oracle_costs(std::span<const TspInstance> instances,
                                         const OracleChoice& choice,
                                         int threads = 1);

/// Per-instance optimality gaps plus the aggregate tail statistics.
struct GapReport {
  std::vector<double> gaps; // dataset order (fractions, not percent)
  double mean_gap = 0.0;
  double worst_1 = 0.0;  // mean over the worst ceil(1% N)
  double worst_05 = 0.0; // worst 0.5%
  double worst_01 = 0.0; // worst 0.1%
  std::string oracle_method;
  std::uint64_t seed = 0;
  int epoch = 0;

  nlohmann::ordered_json to_json(bool include_gaps = true) const;
  static GapReport from_json(const nlohmann::json& j);
};

/// Build a report from raw gaps; enforces the tail monotonicity invariant
/// worst 0.1% >= worst 0.5% >= worst 1% >= mean.
GapReport make_gap_report(std::vector<double> gaps, std::string oracle_method,
                          std::uint64_t seed, int epoch);

/// Greedy-decode every instance and compare against precomputed reference
/// costs. `provenance`, when given, names instances in error messages.
GapReport evaluate_with_costs(const SolverPolicy& policy,
                              std::span<const TspInstance> instances,
                              std::span<const double> oracle_costs,
                              const std::string& oracle_method,
                              std::span<const std::string> provenance = {});

/// Convenience wrapper: compute oracle costs, then evaluate.
GapReport evaluate(const SolverPolicy& policy,
                   std::span<const TspInstance> instances,
                   const OracleChoice& choice,
                   std::span<const std::string> provenance = {});

/// Training-loop configuration. Defaults are the desk-scale profile; the
/// acceptance experiments shrink n / widths / batch counts.
struct TrainConfig {
  TrainingMode mode = TrainingMode::cogs;
  int n = 50;
  int epochs = 50;
  int batch_size = 256;
  int batches_per_epoch = 20;
  double learning_rate = 1e-4;
  double grad_clip = 1.0;
  int warmup_epochs = 5;
  int validation_size = 512;
  PolicyConfig policy_config;
  HacConfig hac;
  GeneratorConfig clustered; // data family for no_vae mode (kind forced)
  std::uint64_t master_seed = 0;

  nlohmann::ordered_json to_json() const;
};

struct EpochLog {
  int epoch = 0;
  std::string phase; // "warmup" or "train"
  std::string mode;
  std::uint64_t seed = 0;
  double train_loss = 0.0;      // mean weighted sampled cost
  double mean_advantage = 0.0;
  double validation_cost = 0.0; // policy mean greedy cost on validation
  bool baseline_replaced = false;
  std::optional<GapReport> eval; // present on eval-stride epochs (no gaps)

  nlohmann::ordered_json to_json() const;
};

/// Optional per-epoch evaluation against a fixed dataset whose oracle
/// costs are computed once up front.
struct EvalContext {
  std::vector<TspInstance> instances;
  std::vector<double> oracle_costs;
  std::string oracle_method;
  int stride = 1; // evaluate every `stride` epochs (and the final one)
};

EvalContext make_eval_context(std::vector<TspInstance> instances,
                              const OracleChoice& choice, int stride = 1,
                              int threads = 1);

/// Test seam: observes every stage of the shared loop in order.
struct TrainObserver {
  std::function<void(int epoch, std::span<const TspInstance> data)> on_epoch_data;
  std::function<void(int epoch, int batch, const ReinforceStats& stats,
                     std::span<const double> weights)> on_batch;
  std::function<void(int epoch, const BaselineDecision& decision)> on_baseline;
};

/// One epoch's training data for the given mode:
///   uniform     -> sample_uniform
///   hac         -> sample_uniform, then hac_step
///   cogs        -> VAE decode, then hac_step
///   cogs_no_hac -> VAE decode only
///   no_vae      -> sample_clustered_uniform, then hac_step
/// Per-instance seeds derive from (master_seed, mode-specific label, epoch,
/// index). The VAE is required only for the cogs modes.
std::vector<TspInstance> make_training_data(const TrainConfig& config,
                                            int epoch, int count,
                                            const VaeModel* vae,
                                            const SolverPolicy& policy,
                                            const RolloutBaseline& baseline);

/// Fresh uniform validation set (the validation distribution of record).
std::vector<TspInstance> make_validation_set(const TrainConfig& config);

/// Initialize a policy and baseline and train on uniform data for
/// config.warmup_epochs (the "initialize and warm up" step every mode
/// shares). Returns the epoch logs.
std::vector<EpochLog> warm_up(SolverPolicy& policy, RolloutBaseline& baseline,
                              std::span<const TspInstance> validation,
                              const TrainConfig& config,
                              const TrainObserver* observer = nullptr);

/// The shared fine-tuning loop: per epoch, build mode-specific data, run
/// re-weighted REINFORCE updates per batch, then try to replace the
/// baseline on the validation set. On a numerical failure a rescue
/// checkpoint is written to run_dir (when set) before rethrowing with
/// (epoch, batch) context. Bit-reproducible for a fixed config.
std::vector<EpochLog> cogs_train(SolverPolicy& policy, RolloutBaseline& baseline,
                                 const VaeModel* vae,
                                 std::span<const TspInstance> validation,
                                 const TrainConfig& config,
                                 const std::filesystem::path& run_dir = {},
                                 const TrainObserver* observer = nullptr,
                                 const EvalContext* eval = nullptr);

/// Cross-seed aggregation of one metric set per mode, plus Welch t-tests
/// between every mode pair per metric.
struct RunSummary {
  struct MetricStats {
    std::vector<double> values; // one per seed
    double mean = 0.0;
    double stddev = 0.0; // sample stddev; 0 and flagged when single seed
    bool single_seed = false;
  };
  // mode -> metric -> stats; metrics: mean_gap, worst_1, worst_05, worst_01
  std::map<std::string, std::map<std::string, MetricStats>> modes;
  struct TTest {
    std::string mode_a, mode_b, metric;
    double t = 0.0, p = 1.0;
  };
  std::vector<TTest> t_tests;
  std::string oracle_method;

  nlohmann::ordered_json to_json() const;
};

RunSummary aggregate_runs(
    const std::map<std::string, std::vector<GapReport>>& reports_per_mode);

} // namespace cogs
