#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>

#include "cogs/errors.hpp"
#include "cogs/pipeline.hpp"
#include "test_util.hpp"

using namespace cogs;
namespace fs = std::filesystem;

namespace {

TrainConfig toy_config(TrainingMode mode, std::uint64_t seed) {
  TrainConfig config;
  config.mode = mode;
  config.n = 8;
  config.epochs = 2;
  config.batch_size = 8;
  config.batches_per_epoch = 2;
  config.learning_rate = 1e-3;
  config.warmup_epochs = 1;
  config.validation_size = 16;
  config.policy_config = PolicyConfig::tiny();
  config.master_seed = seed;
  return config;
}

VaeModel toy_vae(int n, std::uint64_t seed) {
  return VaeModel::create({n, 3, 12}, seed);
}

std::uint64_t hash_instances(std::span<const TspInstance> data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& inst : data)
    for (const auto& p : inst.points) {
      std::uint64_t bits;
      std::memcpy(&bits, &p.x, 8);
      h = splitmix64(h ^ bits);
      std::memcpy(&bits, &p.y, 8);
      h = splitmix64(h ^ bits);
    }
  return h;
}

} // namespace

TEST_CASE("gap report") {
  SUBCASE("constructed tails from 1..100 percent") {
    std::vector<double> gaps;
    for (int i = 1; i <= 100; ++i) gaps.push_back(i / 100.0);
    const GapReport r = make_gap_report(gaps, "local_search", 1, 2);
    CHECK(r.worst_1 == doctest::Approx(1.0));
    CHECK(r.worst_05 == doctest::Approx(1.0));
    CHECK(r.worst_01 == doctest::Approx(1.0));
    CHECK(r.mean_gap == doctest::Approx(0.505));
  }
  SUBCASE("tail monotonicity holds on random reports") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> gaps(200);
      for (auto& g : gaps) g = std::abs(rng.normal(0.0, 0.3));
      const GapReport r = make_gap_report(gaps, "held_karp", 0, 0);
      CHECK(r.worst_01 >= r.worst_05);
      CHECK(r.worst_05 >= r.worst_1);
      CHECK(r.worst_1 >= r.mean_gap);
    }
  }
  SUBCASE("json round trip") {
    const GapReport r = make_gap_report({0.1, 0.2, 0.3}, "local_search", 7, 9);
    const GapReport back = GapReport::from_json(r.to_json(true));
    CHECK(back.mean_gap == r.mean_gap);
    CHECK(back.worst_01 == r.worst_01);
    CHECK(back.gaps == r.gaps);
    CHECK(back.oracle_method == "local_search");
    CHECK(back.seed == 7);
    CHECK(back.epoch == 9);
  }
  SUBCASE("non-finite gap rejected") {
    CHECK_THROWS_AS(make_gap_report({0.1, std::nan("")}, "x", 0, 0),
                    NumericalFailureError);
  }
}

TEST_CASE("evaluate") {
  const SolverPolicy policy = SolverPolicy::create(PolicyConfig::tiny(), 1);
  std::vector<TspInstance> data;
  for (int i = 0; i < 20; ++i)
    data.push_back(test::random_uniform_instance(8, 100 + i));

  SUBCASE("policy scored against its own tours gives all-zero gaps") {
    std::vector<double> own_costs;
    for (const auto& r : greedy_decode(policy, data))
      own_costs.push_back(r.tour.length);
    const GapReport r =
        evaluate_with_costs(policy, data, own_costs, "self");
    CHECK(r.mean_gap == 0.0);
    CHECK(r.worst_1 == 0.0);
    CHECK(r.worst_01 == 0.0);
  }
  SUBCASE("against held-karp: nonnegative gaps") {
    OracleChoice choice;
    choice.method = OracleMethod::held_karp;
    const GapReport r = evaluate(policy, data, choice);
    CHECK(r.oracle_method == "held_karp");
    for (const double g : r.gaps) CHECK(g >= -1e-9);
  }
  SUBCASE("oracle failure carries provenance") {
    std::vector<TspInstance> big = {test::random_uniform_instance(25, 1)};
    OracleChoice choice;
    choice.method = OracleMethod::held_karp; // cap is 18
    const std::vector<std::string> provenance = {"fixture-25"};
    CHECK_THROWS_AS(evaluate(policy, big, choice, provenance), Error);
  }
  SUBCASE("parallel oracle computation matches serial") {
    OracleChoice choice;
    choice.method = OracleMethod::local_search;
    choice.restarts = 3;
    const auto serial = compute_oracle_costs(data, choice, 1);
    const auto parallel = compute_oracle_costs(data, choice, 4);
    CHECK(serial == parallel);
  }
}

TEST_CASE("make_training_data modes") {
  const TrainConfig base = toy_config(TrainingMode::uniform, 42);
  const SolverPolicy policy = SolverPolicy::create(base.policy_config, 3);
  const RolloutBaseline baseline{SolverPolicy::create(base.policy_config, 4),
                                 0.0};
  const VaeModel vae = toy_vae(base.n, 5);

  SUBCASE("uniform mode reproduces sample_uniform with derived seeds") {
    const auto data =
        make_training_data(base, 1, 8, nullptr, policy, baseline);
    for (int i = 0; i < 8; ++i) {
      const TspInstance expected = sample_uniform(
          base.n, derive_seed(base.master_seed, "train.uniform", 1, i));
      for (int p = 0; p < base.n; ++p) {
        CHECK(data[i].points[p].x == expected.points[p].x);
        CHECK(data[i].points[p].y == expected.points[p].y);
      }
    }
  }
  SUBCASE("all modes produce in-bounds data; hashes differ across modes") {
    std::set<std::uint64_t> hashes;
    for (const auto mode :
         {TrainingMode::uniform, TrainingMode::hac, TrainingMode::cogs,
          TrainingMode::cogs_no_hac, TrainingMode::no_vae}) {
      TrainConfig config = toy_config(mode, 42);
      const auto data =
          make_training_data(config, 1, 8, &vae, policy, baseline);
      CHECK(data.size() == 8);
      for (const auto& inst : data) validate_instance(inst);
      hashes.insert(hash_instances(data));
    }
    CHECK(hashes.size() == 5);
  }
  SUBCASE("cogs modes require the vae") {
    TrainConfig config = toy_config(TrainingMode::cogs, 42);
    CHECK_THROWS_AS(
        make_training_data(config, 1, 8, nullptr, policy, baseline),
        InvalidArgumentError);
  }
  SUBCASE("hac mode = uniform data passed through the ascent step") {
    TrainConfig config = toy_config(TrainingMode::hac, 42);
    config.hac.eta = 0.0; // identity ascent: must equal the uniform data
    const auto hac_data =
        make_training_data(config, 2, 8, nullptr, policy, baseline);
    TrainConfig uniform_config = toy_config(TrainingMode::uniform, 42);
    const auto uniform_data =
        make_training_data(uniform_config, 2, 8, nullptr, policy, baseline);
    CHECK(hash_instances(hac_data) == hash_instances(uniform_data));
  }
}

TEST_CASE("training loop") {
  SUBCASE("warm start then zero epochs leaves the policy unchanged") {
    TrainConfig config = toy_config(TrainingMode::uniform, 7);
    SolverPolicy policy = SolverPolicy::create(config.policy_config, 11);
    RolloutBaseline baseline{policy, 0.0};
    const auto validation = make_validation_set(config);
    warm_up(policy, baseline, validation, config);
    const auto before = policy.params.values();
    TrainConfig none = config;
    none.epochs = 0;
    const auto logs = cogs_train(policy, baseline, nullptr, validation, none);
    CHECK(logs.empty());
    CHECK(policy.params.values() == before);
  }
  SUBCASE("bit-reproducible end to end") {
    const auto run = [](std::uint64_t seed) {
      TrainConfig config = toy_config(TrainingMode::cogs, seed);
      SolverPolicy policy = SolverPolicy::create(config.policy_config, 1);
      RolloutBaseline baseline{policy, 0.0};
      const auto validation = make_validation_set(config);
      warm_up(policy, baseline, validation, config);
      const VaeModel vae = toy_vae(config.n, 2);
      cogs_train(policy, baseline, &vae, validation, config);
      return policy.params.values();
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
  }
  SUBCASE("mode wiring: identical loop stages across modes") {
    // A counting probe: every mode must execute the same sequence of
    // stages; only the data differs.
    const VaeModel vae = toy_vae(8, 2);
    std::vector<std::string> stage_sequences;
    for (const auto mode : {TrainingMode::uniform, TrainingMode::hac,
                            TrainingMode::cogs, TrainingMode::cogs_no_hac,
                            TrainingMode::no_vae}) {
      TrainConfig config = toy_config(mode, 13);
      SolverPolicy policy = SolverPolicy::create(config.policy_config, 1);
      RolloutBaseline baseline{policy, 0.0};
      const auto validation = make_validation_set(config);
      std::string stages;
      TrainObserver observer;
      observer.on_epoch_data = [&](int, std::span<const TspInstance> data) {
        stages += "D" + std::to_string(data.size());
      };
      observer.on_batch = [&](int, int, const ReinforceStats&,
                              std::span<const double> weights) {
        stages += "B" + std::to_string(weights.size());
      };
      observer.on_baseline = [&](int, const BaselineDecision&) {
        stages += "V";
      };
      cogs_train(policy, baseline, &vae, validation, config, {}, &observer);
      stage_sequences.push_back(stages);
    }
    for (std::size_t i = 1; i < stage_sequences.size(); ++i)
      CHECK(stage_sequences[i] == stage_sequences[0]);
  }
  SUBCASE("baseline replacement never raises its validation cost") {
    TrainConfig config = toy_config(TrainingMode::uniform, 15);
    config.epochs = 4;
    SolverPolicy policy = SolverPolicy::create(config.policy_config, 1);
    RolloutBaseline baseline{policy, 0.0};
    const auto validation = make_validation_set(config);
    double last_baseline_cost = mean_greedy_cost(baseline.policy, validation);
    TrainObserver observer;
    observer.on_baseline = [&](int, const BaselineDecision& decision) {
      if (decision.replaced) {
        CHECK(decision.policy_cost < last_baseline_cost);
        last_baseline_cost = decision.policy_cost;
      }
    };
    cogs_train(policy, baseline, nullptr, validation, config, {}, &observer);
  }
  SUBCASE("per-epoch eval lands in the logs at the stride") {
    TrainConfig config = toy_config(TrainingMode::uniform, 21);
    config.epochs = 4;
    SolverPolicy policy = SolverPolicy::create(config.policy_config, 1);
    RolloutBaseline baseline{policy, 0.0};
    const auto validation = make_validation_set(config);
    std::vector<TspInstance> eval_set;
    for (int i = 0; i < 10; ++i)
      eval_set.push_back(test::random_uniform_instance(config.n, 3000 + i));
    OracleChoice choice;
    choice.method = OracleMethod::held_karp;
    const EvalContext ctx = make_eval_context(eval_set, choice, 2);
    const auto logs =
        cogs_train(policy, baseline, nullptr, validation, config, {}, nullptr,
                   &ctx);
    REQUIRE(logs.size() == 4);
    CHECK_FALSE(logs[0].eval.has_value());
    CHECK(logs[1].eval.has_value());
    CHECK_FALSE(logs[2].eval.has_value());
    CHECK(logs[3].eval.has_value()); // final epoch always evaluated
    CHECK(logs[1].eval->oracle_method == "held_karp");
    CHECK(logs[1].eval->epoch == 2);
  }
}

TEST_CASE("aggregate_runs") {
  const auto report = [](double base, std::uint64_t seed) {
    std::vector<double> gaps(100);
    Rng rng(seed);
    for (auto& g : gaps) g = base + std::abs(rng.normal(0.0, 0.01));
    return make_gap_report(gaps, "local_search", seed, 10);
  };
  SUBCASE("means, deviations, and welch tests per metric") {
    std::map<std::string, std::vector<GapReport>> runs;
    for (std::uint64_t s = 0; s < 5; ++s) {
      runs["uniform"].push_back(report(0.20, s));
      runs["cogs"].push_back(report(0.05, 100 + s));
    }
    const RunSummary summary = aggregate_runs(runs);
    CHECK(summary.modes.at("uniform").at("mean_gap").mean >
          summary.modes.at("cogs").at("mean_gap").mean);
    CHECK(summary.modes.at("cogs").at("mean_gap").values.size() == 5);
    CHECK_FALSE(summary.modes.at("cogs").at("mean_gap").single_seed);
    REQUIRE(summary.t_tests.size() == 4); // one pair x four metrics
    for (const auto& t : summary.t_tests) {
      CHECK(t.p < 0.01); // clearly separated groups
      CHECK(t.mode_a == "cogs");
      CHECK(t.mode_b == "uniform");
    }
  }
  SUBCASE("single seed flagged, not fatal") {
    std::map<std::string, std::vector<GapReport>> runs;
    runs["uniform"].push_back(report(0.2, 1));
    const RunSummary summary = aggregate_runs(runs);
    CHECK(summary.modes.at("uniform").at("mean_gap").single_seed);
    CHECK(summary.modes.at("uniform").at("mean_gap").stddev == 0.0);
    CHECK(summary.t_tests.empty());
  }
  SUBCASE("mixed oracle methods rejected") {
    std::map<std::string, std::vector<GapReport>> runs;
    runs["a"].push_back(report(0.1, 1));
    GapReport other = report(0.1, 2);
    other.oracle_method = "held_karp";
    runs["b"].push_back(other);
    CHECK_THROWS_AS(aggregate_runs(runs), InvalidArgumentError);
  }
}

TEST_CASE("config snapshot json") {
  TrainConfig config = toy_config(TrainingMode::cogs, 3);
  const auto j = config.to_json();
  CHECK(j.at("mode") == "cogs");
  CHECK(j.at("n") == 8);
  CHECK(j.at("hac").at("eta") == 1.0);
  CHECK(j.at("clustered").at("kind") == "clustered_uniform");
  CHECK(j.at("policy").at("embed_dim") == 8);
}
