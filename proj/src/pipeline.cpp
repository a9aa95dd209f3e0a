#include "cogs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "cogs/dataset_io.hpp"
#include "cogs/errors.hpp"
#include "cogs/rng.hpp"

namespace cogs {

std::string to_string(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::uniform: return "uniform";
    case TrainingMode::hac: return "hac";
    case TrainingMode::cogs: return "cogs";
    case TrainingMode::cogs_no_hac: return "cogs_no_hac";
    case TrainingMode::no_vae: return "no_vae";
  }
  return "unknown";
}

TrainingMode training_mode_from_string(const std::string& name) {
  if (name == "uniform") return TrainingMode::uniform;
  if (name == "hac") return TrainingMode::hac;
  if (name == "cogs") return TrainingMode::cogs;
  if (name == "cogs_no_hac") return TrainingMode::cogs_no_hac;
  if (name == "no_vae") return TrainingMode::no_vae;
  throw InvalidArgumentError("unknown training mode: " + name);
}

namespace {

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = std::min<int>(threads, static_cast<int>(count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace

std::vector<double> compute_oracle_costs(std::span<const TspInstance> instances,
                                         const OracleChoice& choice,
                                         int threads) {
  if (instances.empty())
    throw InvalidArgumentError("compute_oracle_costs: empty dataset");
  std::vector<double> costs(instances.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    try {
      switch (choice.method) {
        case OracleMethod::brute_force:
          costs[i] = brute_force(instances[i]).tour.length;
          break;
        case OracleMethod::held_karp:
          costs[i] = held_karp(instances[i], choice.held_karp_cap).tour.length;
          break;
        case OracleMethod::local_search:
          costs[i] = local_search_oracle(instances[i], choice.restarts,
                                         derive_seed(choice.seed, "oracle.ls", i))
                         .tour.length;
          break;
        case OracleMethod::external:
          throw InvalidArgumentError(
              "external oracle costs must be supplied precomputed");
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return costs;
}

nlohmann::ordered_json GapReport::to_json(bool include_gaps) const {
  nlohmann::ordered_json j;
  j["oracle_method"] = oracle_method;
  j["seed"] = seed;
  j["epoch"] = epoch;
  j["count"] = gaps.size();
  j["mean_gap"] = mean_gap;
  j["worst_1"] = worst_1;
  j["worst_05"] = worst_05;
  j["worst_01"] = worst_01;
  if (include_gaps) j["gaps"] = gaps;
  return j;
}

GapReport GapReport::from_json(const nlohmann::json& j) {
  GapReport r;
  r.oracle_method = j.at("oracle_method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.epoch = j.at("epoch").get<int>();
  r.mean_gap = j.at("mean_gap").get<double>();
  r.worst_1 = j.at("worst_1").get<double>();
  r.worst_05 = j.at("worst_05").get<double>();
  r.worst_01 = j.at("worst_01").get<double>();
  if (j.contains("gaps")) r.gaps = j.at("gaps").get<std::vector<double>>();
  return r;
}

GapReport make_gap_report(std::vector<double> gaps, std::string oracle_method,
                          std::uint64_t seed, int epoch) {
  if (gaps.empty()) throw InvalidArgumentError("gap report: no gaps");
  for (const double g : gaps)
    if (!std::isfinite(g))
      throw NumericalFailureError("gap report: non-finite gap");
  GapReport r;
  r.mean_gap = mean(gaps);
  r.worst_1 = worst_tail_mean(gaps, 1.0);
  r.worst_05 = worst_tail_mean(gaps, 0.5);
  r.worst_01 = worst_tail_mean(gaps, 0.1);
  r.gaps = std::move(gaps);
  r.oracle_method = std::move(oracle_method);
  r.seed = seed;
  r.epoch = epoch;
  // Tail means over fewer, larger elements can only grow.
  if (r.worst_01 + 1e-12 < r.worst_05 || r.worst_05 + 1e-12 < r.worst_1 ||
      r.worst_1 + 1e-12 < r.mean_gap)
    throw NumericalFailureError("gap report: tail monotonicity violated");
  return r;
}

GapReport evaluate_with_costs(const SolverPolicy& policy,
                              std::span<const TspInstance> instances,
                              std::span<const double> oracle_costs,
                              const std::string& oracle_method,
                              std::span<const std::string> provenance) {
  if (instances.empty()) throw InvalidArgumentError("evaluate: empty dataset");
  if (instances.size() != oracle_costs.size())
    throw InvalidArgumentError("evaluate: oracle cost count mismatch");
  std::vector<double> gaps(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    try {
      const DecodeResult decoded =
          greedy_decode(policy, std::span(&instances[i], 1))[0];
      gaps[i] = optimality_gap(decoded.tour.length, oracle_costs[i]);
    } catch (const std::exception& e) {
      const std::string who = i < provenance.size()
                                  ? provenance[i]
                                  : ("instance " + std::to_string(i));
      throw Error("evaluate: failure on " + who + ": " + e.what());
    }
  }
  return make_gap_report(std::move(gaps), oracle_method, 0, 0);
}

GapReport evaluate(const SolverPolicy& policy,
                   std::span<const TspInstance> instances,
                   const OracleChoice& choice,
                   std::span<const std::string> provenance) {
  std::vector<double> costs;
  try {
    costs = compute_oracle_costs(instances, choice);
  } catch (const std::exception& e) {
    throw Error(std::string("evaluate: oracle failure: ") + e.what());
  }
  return evaluate_with_costs(policy, instances, costs,
                             to_string(choice.method), provenance);
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  j["n"] = n;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["batches_per_epoch"] = batches_per_epoch;
  j["learning_rate"] = learning_rate;
  j["grad_clip"] = grad_clip;
  j["warmup_epochs"] = warmup_epochs;
  j["validation_size"] = validation_size;
  j["policy"] = policy_config.to_json();
  nlohmann::ordered_json h;
  h["eta"] = hac.eta;
  h["tau"] = hac.tau;
  h["surrogate"] = cogs::to_string(hac.surrogate);
  h["ascent_steps"] = hac.ascent_steps;
  j["hac"] = h;
  GeneratorConfig cu = clustered;
  cu.kind = GeneratorKind::clustered_uniform;
  cu.n = n;
  j["clustered"] = generator_to_json(cu);
  j["master_seed"] = master_seed;
  return j;
}

nlohmann::ordered_json EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["phase"] = phase;
  j["mode"] = mode;
  j["seed"] = seed;
  j["train_loss"] = train_loss;
  j["mean_advantage"] = mean_advantage;
  j["validation_cost"] = validation_cost;
  j["baseline_replaced"] = baseline_replaced;
  if (eval.has_value()) j["eval"] = eval->to_json(false);
  return j;
}

EvalContext make_eval_context(std::vector<TspInstance> instances,
                              const OracleChoice& choice, int stride,
                              int threads) {
  if (stride < 1)
    throw InvalidArgumentError("eval context: stride must be >= 1");
  EvalContext ctx;
  ctx.oracle_costs = compute_oracle_costs(instances, choice, threads);
  ctx.instances = std::move(instances);
  ctx.oracle_method = to_string(choice.method);
  ctx.stride = stride;
  return ctx;
}

std::vector<TspInstance> make_training_data(const TrainConfig& config,
                                            int epoch, int count,
                                            const VaeModel* vae,
                                            const SolverPolicy& policy,
                                            const RolloutBaseline& baseline) {
  std::vector<TspInstance> data;
  data.reserve(count);
  const std::uint64_t master = config.master_seed;

  const auto surrogate = [&]() -> Surrogate {
    if (config.hac.surrogate == SurrogateKind::rollout_baseline)
      return Surrogate::from_baseline(baseline.policy);
    return Surrogate::from_local_search(
        config.hac.local_search_restarts,
        derive_seed(master, "hac.ls_surrogate", epoch));
  };

  switch (config.mode) {
    case TrainingMode::uniform: {
      for (int i = 0; i < count; ++i)
        data.push_back(
            sample_uniform(config.n, derive_seed(master, "train.uniform", epoch, i)));
      return data;
    }
    case TrainingMode::hac: {
      for (int i = 0; i < count; ++i)
        data.push_back(
            sample_uniform(config.n, derive_seed(master, "train.uniform", epoch, i)));
      return hac_step(policy, surrogate(), data, config.hac);
    }
    case TrainingMode::cogs:
    case TrainingMode::cogs_no_hac: {
      if (vae == nullptr)
        throw InvalidArgumentError("training mode " + to_string(config.mode) +
                                   " requires a trained VAE");
      data = sample_instances(*vae, count,
                              derive_seed(master, "train.vae_decode", epoch));
      if (config.mode == TrainingMode::cogs_no_hac) return data;
      return hac_step(policy, surrogate(), data, config.hac);
    }
    case TrainingMode::no_vae: {
      GeneratorConfig cu = config.clustered;
      cu.kind = GeneratorKind::clustered_uniform;
      cu.n = config.n;
      for (int i = 0; i < count; ++i)
        data.push_back(generate_instance(
            cu, derive_seed(master, "train.clustered", epoch), i));
      return hac_step(policy, surrogate(), data, config.hac);
    }
  }
  throw InvalidArgumentError("make_training_data: unknown mode");
}

std::vector<TspInstance> make_validation_set(const TrainConfig& config) {
  std::vector<TspInstance> out;
  out.reserve(config.validation_size);
  for (int i = 0; i < config.validation_size; ++i)
    out.push_back(sample_uniform(
        config.n, derive_seed(config.master_seed, "validation", i)));
  return out;
}

namespace {

// The one loop every mode runs; modes differ only in make_training_data.
std::vector<EpochLog> run_training_loop(SolverPolicy& policy,
                                        RolloutBaseline& baseline,
                                        const VaeModel* vae,
                                        std::span<const TspInstance> validation,
                                        const TrainConfig& config, int epochs,
                                        const std::string& phase,
                                        const std::filesystem::path& run_dir,
                                        const TrainObserver* observer,
                                        const EvalContext* eval = nullptr) {
  if (validation.empty())
    throw InvalidArgumentError("training: validation set is empty");
  AdamOptimizer adam(config.learning_rate, config.grad_clip);
  std::vector<EpochLog> logs;
  const int count = config.batch_size * config.batches_per_epoch;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    int failing_batch = -1;
    try {
      const std::vector<TspInstance> data =
          make_training_data(config, epoch, count, vae, policy, baseline);
      if (observer && observer->on_epoch_data)
        observer->on_epoch_data(epoch, data);

      double loss_sum = 0.0;
      double adv_sum = 0.0;
      for (int b = 0; b < config.batches_per_epoch; ++b) {
        failing_batch = b;
        const std::span<const TspInstance> batch(
            data.data() + static_cast<std::size_t>(b) * config.batch_size,
            config.batch_size);
        std::vector<double> baseline_costs(batch.size());
        {
          const std::vector<DecodeResult> base =
              greedy_decode(baseline.policy, batch);
          for (std::size_t i = 0; i < batch.size(); ++i)
            baseline_costs[i] = base[i].tour.length;
        }
        // Hardness against the rollout baseline drives the re-weighting.
        std::vector<double> scores(batch.size());
        {
          const std::vector<DecodeResult> model = greedy_decode(policy, batch);
          for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!(baseline_costs[i] > 0.0))
              throw DegenerateInputError(
                  "training: zero baseline cost (degenerate instance)");
            scores[i] =
                (model[i].tour.length - baseline_costs[i]) / baseline_costs[i];
          }
        }
        const std::vector<double> weights = reweight(scores, config.hac.tau);
        const ReinforceStats stats = reinforce_loss_with_costs(
            policy, batch, baseline_costs, weights,
            derive_seed(config.master_seed, "step." + phase, epoch, b));
        adam.step(policy.params);
        if (observer && observer->on_batch)
          observer->on_batch(epoch, b, stats, weights);
        loss_sum += stats.loss;
        adv_sum += stats.mean_advantage;
      }
      failing_batch = -1;

      const BaselineDecision decision =
          maybe_update_baseline(policy, baseline, validation);
      if (observer && observer->on_baseline)
        observer->on_baseline(epoch, decision);

      EpochLog log;
      log.epoch = epoch;
      log.phase = phase;
      log.mode = to_string(config.mode);
      log.seed = config.master_seed;
      log.train_loss = loss_sum / config.batches_per_epoch;
      log.mean_advantage = adv_sum / config.batches_per_epoch;
      log.validation_cost = decision.policy_cost;
      log.baseline_replaced = decision.replaced;
      if (eval != nullptr &&
          (epoch % eval->stride == 0 || epoch == epochs)) {
        GapReport report =
            evaluate_with_costs(policy, eval->instances, eval->oracle_costs,
                                eval->oracle_method);
        report.seed = config.master_seed;
        report.epoch = epoch;
        report.gaps.clear(); // the log keeps aggregates only
        log.eval = std::move(report);
      }
      logs.push_back(log);
    } catch (const NumericalFailureError& e) {
      if (!run_dir.empty()) {
        save_policy(run_dir / "rescue.ckpt", policy, epoch);
      }
      throw NumericalFailureError(
          "training failed at epoch " + std::to_string(epoch) +
          (failing_batch >= 0 ? ", batch " + std::to_string(failing_batch) : "") +
          ": " + e.what());
    }
  }
  return logs;
}

} // namespace

std::vector<EpochLog> warm_up(SolverPolicy& policy, RolloutBaseline& baseline,
                              std::span<const TspInstance> validation,
                              const TrainConfig& config,
                              const TrainObserver* observer) {
  baseline.policy = policy; // frozen copy of the initial parameters
  baseline.validation_cost = 0.0;
  TrainConfig warm = config;
  warm.mode = TrainingMode::uniform;
  return run_training_loop(policy, baseline, nullptr, validation, warm,
                           config.warmup_epochs, "warmup", {}, observer);
}

std::vector<EpochLog> cogs_train(SolverPolicy& policy, RolloutBaseline& baseline,
                                 const VaeModel* vae,
                                 std::span<const TspInstance> validation,
                                 const TrainConfig& config,
                                 const std::filesystem::path& run_dir,
                                 const TrainObserver* observer,
                                 const EvalContext* eval) {
  return run_training_loop(policy, baseline, vae, validation, config,
                           config.epochs, "train", run_dir, observer, eval);
}

namespace {
const std::vector<std::pair<std::string, double GapReport::*>> kMetrics = {
    {"mean_gap", &GapReport::mean_gap},
    {"worst_1", &GapReport::worst_1},
    {"worst_05", &GapReport::worst_05},
    {"worst_01", &GapReport::worst_01},
};
}

RunSummary aggregate_runs(
    const std::map<std::string, std::vector<GapReport>>& reports_per_mode) {
  if (reports_per_mode.empty())
    throw InvalidArgumentError("aggregate_runs: no reports");
  RunSummary summary;
  for (const auto& [mode, reports] : reports_per_mode) {
    if (reports.empty())
      throw InvalidArgumentError("aggregate_runs: mode " + mode + " has no reports");
    for (const auto& r : reports) {
      if (summary.oracle_method.empty()) summary.oracle_method = r.oracle_method;
      if (r.oracle_method != summary.oracle_method)
        throw InvalidArgumentError(
            "aggregate_runs: mixed oracle methods (" + summary.oracle_method +
            " vs " + r.oracle_method + ")");
    }
    for (const auto& [metric, member] : kMetrics) {
      RunSummary::MetricStats stats;
      for (const auto& r : reports) stats.values.push_back(r.*member);
      stats.mean = mean(stats.values);
      if (stats.values.size() >= 2) {
        stats.stddev = sample_stddev(stats.values);
      } else {
        stats.stddev = 0.0;
        stats.single_seed = true;
      }
      summary.modes[mode][metric] = std::move(stats);
    }
  }
  for (auto it_a = summary.modes.begin(); it_a != summary.modes.end(); ++it_a) {
    for (auto it_b = std::next(it_a); it_b != summary.modes.end(); ++it_b) {
      for (const auto& [metric, member] : kMetrics) {
        const auto& va = it_a->second.at(metric).values;
        const auto& vb = it_b->second.at(metric).values;
        if (va.size() < 2 || vb.size() < 2) continue;
        const WelchResult w = welch_t_test(va, vb);
        summary.t_tests.push_back({it_a->first, it_b->first, metric, w.t, w.p});
      }
    }
  }
  return summary;
}

nlohmann::ordered_json RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["oracle_method"] = oracle_method;
  nlohmann::ordered_json modes_json;
  for (const auto& [mode, metrics] : modes) {
    nlohmann::ordered_json m;
    for (const auto& [metric, stats] : metrics) {
      nlohmann::ordered_json s;
      s["mean"] = stats.mean;
      s["stddev"] = stats.stddev;
      s["single_seed"] = stats.single_seed;
      s["values"] = stats.values;
      m[metric] = s;
    }
    modes_json[mode] = m;
  }
  j["modes"] = modes_json;
  nlohmann::ordered_json tests = nlohmann::ordered_json::array();
  for (const auto& t : t_tests) {
    nlohmann::ordered_json row;
    row["mode_a"] = t.mode_a;
    row["mode_b"] = t.mode_b;
    row["metric"] = t.metric;
    row["t"] = t.t;
    row["p"] = t.p;
    tests.push_back(row);
  }
  j["t_tests"] = tests;
  return j;
}

} // namespace cogs
