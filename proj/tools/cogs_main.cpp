// cogs: dataset generation, VAE and solver training, evaluation, and plot
// emission for the COGS TSP pipeline.

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cogs/dataset_io.hpp"
#include "cogs/distributions.hpp"
#include "cogs/errors.hpp"
#include "cogs/hac.hpp"
#include "cogs/oracle.hpp"
#include "cogs/pipeline.hpp"
#include "cogs/plot.hpp"
#include "cogs/policy.hpp"
#include "cogs/rng.hpp"
#include "cogs/stats.hpp"
#include "cogs/tsplib.hpp"
#include "cogs/vae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct GenDataArgs {
  std::string kind = "uniform";
  int n = 50;
  int count = 100;
  std::uint64_t seed = 0;
  std::string out;
  cogs::GeneratorConfig config;
};

int cmd_gen_data(const GenDataArgs& args) {
  cogs::GeneratorConfig config = args.config;
  config.kind = cogs::generator_kind_from_string(args.kind);
  config.n = args.n;
  config.validate();

  cogs::DatasetFile dataset;
  dataset.count = args.count;
  dataset.n = args.n;
  dataset.generator = cogs::generator_to_json(config);
  dataset.master_seed = args.seed;
  dataset.instances = cogs::generate_dataset(config, args.count, args.seed);
  cogs::save_dataset(args.out, dataset);
  std::cout << "wrote " << args.count << " " << args.kind
            << " instances (n=" << args.n << ", seed=" << args.seed << ") to "
            << args.out << "\n";
  return kExitOk;
}

struct BuildTsplibArgs {
  std::string dir;
  int count = 10000;
  std::uint64_t seed = 0;
  std::string out;
  int max_source_dim = 0;
};

int cmd_build_tsplib50(const BuildTsplibArgs& args) {
  std::vector<cogs::TsplibInstance> sources;
  ordered_json skipped = ordered_json::array();
  ordered_json source_list = ordered_json::array();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(args.dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::string reason;
    try {
      cogs::TsplibInstance inst = cogs::parse_tsplib(cogs::read_file(file));
      if (!cogs::tsplib50_eligible(inst, args.max_source_dim)) {
        reason = inst.dimension < cogs::kTsplib50Points
                     ? "dimension below 50"
                     : "dimension above the configured cap";
      } else {
        ordered_json s;
        s["file"] = file.filename().string();
        s["name"] = inst.name;
        s["dimension"] = inst.dimension;
        source_list.push_back(s);
        sources.push_back(std::move(inst));
        continue;
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    ordered_json s;
    s["file"] = file.filename().string();
    s["reason"] = reason;
    skipped.push_back(s);
    std::cout << "skipping " << file.filename().string() << ": " << reason
              << "\n";
  }

  if (sources.empty()) {
    std::cerr << "error: no eligible EUC_2D sources with >= 50 nodes in "
              << args.dir << " (" << skipped.size() << " file(s) rejected)\n";
    return kExitRuntime;
  }

  const cogs::Tsplib50Dataset built =
      cogs::build_tsplib50(sources, args.count, args.seed);

  const fs::path out_path(args.out);
  fs::path manifest_path = out_path;
  manifest_path += ".manifest.json";

  ordered_json manifest;
  manifest["sources"] = source_list;
  manifest["skipped"] = skipped;
  ordered_json per_instance = ordered_json::array();
  for (std::size_t i = 0; i < built.provenance.size(); ++i) {
    ordered_json row;
    row["index"] = i;
    row["source"] = built.provenance[i].source_name;
    row["seed"] = built.provenance[i].seed;
    per_instance.push_back(row);
  }
  manifest["per_instance"] = per_instance;
  cogs::write_file_atomic(manifest_path, manifest.dump(2) + "\n");

  cogs::DatasetFile dataset;
  dataset.count = args.count;
  dataset.n = cogs::kTsplib50Points;
  dataset.generator = ordered_json{{"kind", "tsplib50"}};
  dataset.master_seed = args.seed;
  dataset.provenance = manifest_path.filename().string();
  dataset.instances = built.instances;
  cogs::save_dataset(out_path, dataset);

  std::cout << "wrote " << args.count << " tsplib50 instances from "
            << sources.size() << " source(s) to " << args.out << " (manifest "
            << manifest_path.string() << ")\n";
  return kExitOk;
}

struct TrainVaeArgs {
  int n = 50;
  int latent = 32;
  int hidden = 128;
  int epochs = 30;
  int batch_size = 64;
  int batches_per_epoch = 8;
  double lr = 1e-3;
  double beta_final = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string history_out;
  cogs::GeneratorConfig gen;
};

int cmd_train_vae(const TrainVaeArgs& args) {
  cogs::VaeConfig config{args.n, args.latent, args.hidden};
  cogs::VaeModel model =
      cogs::VaeModel::create(config, cogs::derive_seed(args.seed, "vae.init"));
  cogs::GeneratorConfig gen = args.gen;
  gen.kind = cogs::GeneratorKind::clustered_uniform;
  gen.n = args.n;
  cogs::VaeTrainConfig train;
  train.epochs = args.epochs;
  train.batch_size = args.batch_size;
  train.batches_per_epoch = args.batches_per_epoch;
  train.learning_rate = args.lr;
  train.beta_final = args.beta_final;

  const auto history = cogs::train_vae(model, gen, train, args.seed);
  cogs::save_vae(args.out, model, args.epochs);
  if (!args.history_out.empty()) {
    fs::remove(args.history_out);
    for (const auto& row : history) {
      ordered_json j;
      j["epoch"] = row.epoch;
      j["reconstruction"] = row.reconstruction;
      j["kl"] = row.kl;
      j["beta"] = row.beta;
      cogs::append_jsonl(args.history_out, j);
    }
  }
  if (!history.empty())
    std::cout << "trained vae for " << args.epochs
              << " epochs (final recon=" << history.back().reconstruction
              << ", kl=" << history.back().kl << "), saved to " << args.out
              << "\n";
  else
    std::cout << "saved untrained vae to " << args.out << "\n";
  return kExitOk;
}

struct SampleVaeArgs {
  std::string model;
  int count = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string pca_train_data;
  std::string pca_out;
  int pca_count = 150;
};

int cmd_sample_vae(const SampleVaeArgs& args) {
  const cogs::LoadedVae loaded = cogs::load_vae(args.model);
  const std::vector<cogs::TspInstance> samples =
      cogs::sample_instances(loaded.model, args.count, args.seed);

  cogs::DatasetFile dataset;
  dataset.count = args.count;
  dataset.n = loaded.model.config.n;
  dataset.generator = ordered_json{{"kind", "vae"}, {"model", args.model}};
  dataset.master_seed = args.seed;
  dataset.instances = samples;
  cogs::save_dataset(args.out, dataset);
  std::cout << "decoded " << args.count << " instances from " << args.model
            << " to " << args.out << "\n";

  if (!args.pca_out.empty()) {
    if (args.pca_train_data.empty())
      throw cogs::InvalidArgumentError(
          "--pca-out requires --pca-train-data (training samples to encode)");
    const cogs::DatasetFile train_data =
        cogs::load_dataset(args.pca_train_data);
    const int k = args.pca_count;
    std::vector<cogs::TspInstance> train_set(
        train_data.instances.begin(),
        train_data.instances.begin() +
            std::min<std::size_t>(k, train_data.instances.size()));
    std::vector<cogs::TspInstance> inference_set(
        samples.begin(),
        samples.begin() + std::min<std::size_t>(k, samples.size()));
    const std::vector<std::pair<std::string, std::vector<cogs::TspInstance>>>
        labeled = {{"training", train_set}, {"inference", inference_set}};
    const cogs::LatentProjection proj =
        cogs::latent_pca_projection(loaded.model, labeled);
    ordered_json out;
    out["explained_variance_ratio"] = proj.explained_variance_ratio;
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < proj.coordinates.rows(); ++i) {
      ordered_json row;
      row["label"] = proj.labels[i];
      row["x"] = proj.coordinates(i, 0);
      row["y"] = proj.coordinates(i, 1);
      rows.push_back(row);
    }
    out["points"] = rows;
    cogs::write_file_atomic(args.pca_out, out.dump(2) + "\n");
    std::cout << "wrote latent PCA projection to " << args.pca_out << "\n";
  }
  return kExitOk;
}

struct TrainSolverArgs {
  std::string mode = "cogs";
  int n = 50;
  int epochs = 50;
  int batch_size = 256;
  int batches_per_epoch = 20;
  double lr = 1e-4;
  double grad_clip = 1.0;
  int warmup_epochs = 5;
  int validation_size = 512;
  std::uint64_t seed = 0;
  int embed_dim = 128;
  int num_layers = 3;
  int num_heads = 8;
  double eta = 1.0;
  double tau = 0.5;
  std::string vae_path;
  std::string init_path;
  std::string run_dir;
  std::string eval_data;
  std::string eval_oracle = "local_search";
  int eval_restarts = 50;
  int eval_stride = 0;
};

int cmd_train_solver(const TrainSolverArgs& args) {
  cogs::TrainConfig config;
  config.mode = cogs::training_mode_from_string(args.mode);
  config.n = args.n;
  config.epochs = args.epochs;
  config.batch_size = args.batch_size;
  config.batches_per_epoch = args.batches_per_epoch;
  config.learning_rate = args.lr;
  config.grad_clip = args.grad_clip;
  config.warmup_epochs = args.warmup_epochs;
  config.validation_size = args.validation_size;
  config.master_seed = args.seed;
  config.policy_config.embed_dim = args.embed_dim;
  config.policy_config.num_layers = args.num_layers;
  config.policy_config.num_heads = args.num_heads;
  config.policy_config.ffn_dim = 4 * args.embed_dim;
  config.hac.eta = args.eta;
  config.hac.tau = args.tau;

  const fs::path run_dir(args.run_dir);
  fs::create_directories(run_dir);
  cogs::write_file_atomic(run_dir / "config.json",
                          config.to_json().dump(2) + "\n");
  const fs::path log_path = run_dir / "log.jsonl";
  fs::remove(log_path);

  std::optional<cogs::VaeModel> vae;
  if (!args.vae_path.empty()) vae = cogs::load_vae(args.vae_path).model;
  if ((config.mode == cogs::TrainingMode::cogs ||
       config.mode == cogs::TrainingMode::cogs_no_hac) &&
      !vae.has_value())
    throw cogs::InvalidArgumentError("mode " + args.mode +
                                     " requires --vae <checkpoint>");

  const std::vector<cogs::TspInstance> validation =
      cogs::make_validation_set(config);

  cogs::SolverPolicy policy = cogs::SolverPolicy::create(
      config.policy_config, cogs::derive_seed(args.seed, "policy.init"));
  cogs::RolloutBaseline baseline{policy, 0.0};

  const auto log_rows = [&](const std::vector<cogs::EpochLog>& rows) {
    for (const auto& row : rows) cogs::append_jsonl(log_path, row.to_json());
  };

  if (!args.init_path.empty()) {
    policy = cogs::load_policy(args.init_path).policy;
    baseline.policy = policy;
  } else if (config.warmup_epochs > 0) {
    log_rows(cogs::warm_up(policy, baseline, validation, config));
  } else {
    baseline.policy = policy;
  }

  std::optional<cogs::EvalContext> eval;
  if (!args.eval_data.empty()) {
    const cogs::DatasetFile data = cogs::load_dataset(args.eval_data);
    cogs::OracleChoice choice;
    choice.method = cogs::oracle_method_from_string(args.eval_oracle);
    choice.restarts = args.eval_restarts;
    choice.seed = cogs::derive_seed(args.seed, "eval.oracle");
    eval = cogs::make_eval_context(data.instances, choice,
                                   std::max(1, args.eval_stride));
  }

  const auto logs =
      cogs::cogs_train(policy, baseline, vae ? &*vae : nullptr, validation,
                       config, run_dir, nullptr, eval ? &*eval : nullptr);
  log_rows(logs);

  cogs::save_policy(run_dir / "policy_final.ckpt", policy, config.epochs);
  cogs::save_policy(run_dir / "baseline_final.ckpt", baseline.policy,
                    config.epochs);
  std::cout << "trained mode=" << args.mode << " for " << config.epochs
            << " epochs (final validation cost="
            << (logs.empty() ? 0.0 : logs.back().validation_cost)
            << "), run dir " << args.run_dir << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string policy;
  std::string data;
  std::string oracle = "local_search";
  int restarts = 50;
  std::uint64_t seed = 0;
  std::string out;
  int dump_worst = 0;
  std::string dump_out;
};

int cmd_eval(const EvalArgs& args) {
  const cogs::LoadedPolicy loaded = cogs::load_policy(args.policy);
  const cogs::DatasetFile data = cogs::load_dataset(args.data);
  cogs::OracleChoice choice;
  choice.method = cogs::oracle_method_from_string(args.oracle);
  choice.restarts = args.restarts;
  choice.seed = cogs::derive_seed(args.seed, "eval.oracle");

  cogs::GapReport report = cogs::evaluate(loaded.policy, data.instances, choice);
  report.seed = args.seed;
  report.epoch = static_cast<int>(loaded.epoch);

  ordered_json out = report.to_json(true);
  out["policy"] = args.policy;
  out["dataset"] = args.data;
  cogs::write_file_atomic(args.out, out.dump() + "\n");
  std::cout << "mean gap " << cogs::format_number(report.mean_gap * 100.0)
            << "% | worst 1% " << cogs::format_number(report.worst_1 * 100.0)
            << "% | worst 0.5% " << cogs::format_number(report.worst_05 * 100.0)
            << "% | worst 0.1% " << cogs::format_number(report.worst_01 * 100.0)
            << "% (oracle " << report.oracle_method << ", "
            << report.gaps.size() << " instances)\n";

  if (args.dump_worst > 0) {
    if (args.dump_out.empty())
      throw cogs::InvalidArgumentError("--dump-worst requires --dump-out");
    std::vector<std::size_t> idx(report.gaps.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return report.gaps[a] > report.gaps[b];
    });
    const int k = std::min<int>(args.dump_worst, static_cast<int>(idx.size()));
    ordered_json dump = ordered_json::array();
    for (int r = 0; r < k; ++r) {
      const std::size_t i = idx[r];
      const cogs::TspInstance& inst = data.instances[i];
      const cogs::DecodeResult decoded =
          cogs::greedy_decode(loaded.policy, std::span(&inst, 1))[0];
      cogs::OracleResult oracle_res;
      switch (choice.method) {
        case cogs::OracleMethod::brute_force:
          oracle_res = cogs::brute_force(inst);
          break;
        case cogs::OracleMethod::held_karp:
          oracle_res = cogs::held_karp(inst, choice.held_karp_cap);
          break;
        default:
          oracle_res = cogs::local_search_oracle(
              inst, choice.restarts,
              cogs::derive_seed(choice.seed, "oracle.ls", i));
          break;
      }
      ordered_json row;
      row["index"] = i;
      row["gap"] = report.gaps[i];
      ordered_json pts = ordered_json::array();
      for (const auto& p : inst.points)
        pts.push_back(ordered_json::array({p.x, p.y}));
      row["points"] = pts;
      row["model_order"] = decoded.tour.order;
      row["model_length"] = decoded.tour.length;
      row["oracle_order"] = oracle_res.tour.order;
      row["oracle_length"] = oracle_res.tour.length;
      dump.push_back(row);
    }
    cogs::write_file_atomic(args.dump_out, dump.dump(2) + "\n");
    std::cout << "dumped " << k << " worst instances to " << args.dump_out
              << "\n";
  }
  return kExitOk;
}

struct PlotArgs {
  std::string kind;
  std::vector<std::string> logs;
  std::string metric = "mean_gap";
  std::string records;
  std::string data;
  int count = 9;
  int cols = 3;
  std::string dump;
  int index = 0;
  std::string pca;
  std::vector<std::string> reports;
  std::string out;
  std::string table_out;
  std::string title;
};

double metric_from_eval(const json& eval, const std::string& metric) {
  return eval.at(metric).get<double>();
}

int plot_gap_epoch(const PlotArgs& args) {
  if (args.logs.empty())
    throw cogs::InvalidArgumentError("gap-epoch plot requires --log files");
  // mode -> epoch -> per-seed metric values
  std::map<std::string, std::map<int, std::vector<double>>> grouped;
  std::set<std::string> oracle_methods;
  for (const auto& path : args.logs) {
    for (const auto& row : cogs::read_jsonl(path)) {
      if (row.value("phase", "") != "train" || !row.contains("eval")) continue;
      oracle_methods.insert(row["eval"].at("oracle_method").get<std::string>());
      grouped[row.at("mode").get<std::string>()][row.at("epoch").get<int>()]
          .push_back(metric_from_eval(row["eval"], args.metric));
    }
  }
  if (grouped.empty())
    throw cogs::InvalidArgumentError(
        "gap-epoch plot: no eval rows found in the given logs");
  if (oracle_methods.size() > 1)
    throw cogs::InvalidArgumentError(
        "refusing to mix oracle methods in one panel");

  std::vector<cogs::PlotSeries> series;
  std::vector<std::string> columns = {"epoch"};
  std::map<int, std::vector<std::string>> table_rows;
  for (const auto& [mode, epochs] : grouped) {
    cogs::PlotSeries s;
    s.label = mode;
    for (const auto& [epoch, values] : epochs) {
      const double m = cogs::mean(values);
      const double sd = values.size() >= 2 ? cogs::sample_stddev(values) : 0.0;
      s.xs.push_back(epoch);
      s.ys.push_back(m * 100.0);
      s.band_lo.push_back((m - sd) * 100.0);
      s.band_hi.push_back((m + sd) * 100.0);
    }
    series.push_back(std::move(s));
    columns.push_back(mode + "_mean");
    columns.push_back(mode + "_std");
  }
  for (const auto& [mode, epochs] : grouped) {
    (void)mode;
    for (const auto& [epoch, values] : epochs) {
      auto& row = table_rows[epoch];
      if (row.empty()) row.push_back(cogs::format_number(epoch));
      row.push_back(cogs::format_number(cogs::mean(values) * 100.0));
      row.push_back(cogs::format_number(
          values.size() >= 2 ? cogs::sample_stddev(values) * 100.0 : 0.0));
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (auto& [epoch, row] : table_rows) {
    (void)epoch;
    rows.push_back(std::move(row));
  }
  const std::string title =
      args.title.empty() ? (args.metric + " vs epoch (" +
                            *oracle_methods.begin() + " oracle)")
                         : args.title;
  cogs::write_file_atomic(
      args.out, cogs::svg_line_plot(title, "epoch", "gap (%)", series));
  if (!args.table_out.empty())
    cogs::write_file_atomic(args.table_out, cogs::text_table(columns, rows));
  return kExitOk;
}

int plot_scatter_records(const PlotArgs& args) {
  if (args.records.empty())
    throw cogs::InvalidArgumentError("scatter plot requires --records");
  std::vector<std::pair<double, double>> records;
  cogs::ScatterGroup group;
  group.label = "instances";
  for (const auto& row : cogs::read_jsonl(args.records)) {
    const double size = row.at("size").get<double>();
    const double gap = row.at("gap").get<double>();
    records.push_back({size, gap});
    group.points.push_back({size, gap * 100.0});
  }
  const double r = cogs::gap_size_correlation(records);
  const std::string title = args.title.empty()
                                ? ("gap vs instance size (Pearson r = " +
                                   cogs::format_number(r) + ")")
                                : args.title;
  cogs::write_file_atomic(args.out,
                          cogs::svg_scatter(title, "instance size", "gap (%)",
                                            std::vector{group}));
  if (!args.table_out.empty()) {
    const std::vector<std::string> columns = {"size", "gap_percent"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& [size, gap] : records)
      rows.push_back({cogs::format_number(size),
                      cogs::format_number(gap * 100.0)});
    rows.push_back({"pearson_r", cogs::format_number(r)});
    cogs::write_file_atomic(args.table_out, cogs::text_table(columns, rows));
  }
  return kExitOk;
}

int plot_gallery(const PlotArgs& args) {
  if (args.data.empty())
    throw cogs::InvalidArgumentError("gallery plot requires --data");
  const cogs::DatasetFile data = cogs::load_dataset(args.data);
  const int k = std::min<int>(args.count, data.count);
  const std::vector<cogs::TspInstance> shown(data.instances.begin(),
                                             data.instances.begin() + k);
  const std::string title =
      args.title.empty()
          ? (data.generator.value("kind", "dataset") + " instances")
          : args.title;
  cogs::write_file_atomic(args.out,
                          cogs::svg_instance_gallery(shown, args.cols, title));
  return kExitOk;
}

int plot_tours(const PlotArgs& args) {
  if (args.dump.empty())
    throw cogs::InvalidArgumentError("tours plot requires --dump (from eval --dump-worst)");
  const json dump = json::parse(cogs::read_file(args.dump));
  if (args.index < 0 || args.index >= static_cast<int>(dump.size()))
    throw cogs::InvalidArgumentError("tours plot: --index out of range");
  const json& row = dump.at(args.index);
  cogs::TspInstance inst;
  for (const auto& p : row.at("points"))
    inst.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  std::vector<cogs::TourOverlay> overlays = {
      {"oracle (" + cogs::format_number(row.at("oracle_length").get<double>()) + ")",
       row.at("oracle_order").get<std::vector<int>>(), "#2ca02c"},
      {"model (" + cogs::format_number(row.at("model_length").get<double>()) + ")",
       row.at("model_order").get<std::vector<int>>(), "#d62728"},
  };
  const std::string title =
      args.title.empty()
          ? ("worst-case instance (gap " +
             cogs::format_number(row.at("gap").get<double>() * 100.0) + "%)")
          : args.title;
  cogs::write_file_atomic(args.out, cogs::svg_tour_overlay(inst, overlays, title));
  return kExitOk;
}

int plot_latent(const PlotArgs& args) {
  if (args.pca.empty())
    throw cogs::InvalidArgumentError("latent plot requires --pca (from sample-vae)");
  const json pca = json::parse(cogs::read_file(args.pca));
  std::map<std::string, cogs::ScatterGroup> groups;
  for (const auto& row : pca.at("points")) {
    const std::string label = row.at("label").get<std::string>();
    auto& g = groups[label];
    g.label = label;
    g.points.push_back({row.at("x").get<double>(), row.at("y").get<double>()});
  }
  std::vector<cogs::ScatterGroup> ordered;
  for (auto& [label, g] : groups) {
    (void)label;
    ordered.push_back(std::move(g));
  }
  const auto evr =
      pca.at("explained_variance_ratio").get<std::vector<double>>();
  const std::string title =
      args.title.empty()
          ? ("latent PCA (evr " + cogs::format_number(evr[0]) + ", " +
             cogs::format_number(evr[1]) + ")")
          : args.title;
  cogs::write_file_atomic(
      args.out, cogs::svg_scatter(title, "PC1", "PC2", ordered));
  return kExitOk;
}

int plot_summary_table(const PlotArgs& args) {
  if (args.reports.empty())
    throw cogs::InvalidArgumentError(
        "summary-table requires --report mode=path entries");
  std::map<std::string, std::vector<cogs::GapReport>> per_mode;
  for (const auto& spec : args.reports) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
      throw cogs::InvalidArgumentError("--report expects mode=path, got " + spec);
    const std::string mode = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    per_mode[mode].push_back(
        cogs::GapReport::from_json(json::parse(cogs::read_file(path))));
  }
  const cogs::RunSummary summary = cogs::aggregate_runs(per_mode);
  const std::string table = cogs::summary_table(summary);
  if (!args.table_out.empty()) cogs::write_file_atomic(args.table_out, table);
  if (!args.out.empty())
    cogs::write_file_atomic(args.out, summary.to_json().dump(2) + "\n");
  std::cout << table;
  return kExitOk;
}

int cmd_plot(const PlotArgs& args) {
  if (args.kind == "gap-epoch") return plot_gap_epoch(args);
  if (args.kind == "gap-size") return plot_scatter_records(args);
  if (args.kind == "gallery") return plot_gallery(args);
  if (args.kind == "tours") return plot_tours(args);
  if (args.kind == "latent") return plot_latent(args);
  if (args.kind == "summary-table") return plot_summary_table(args);
  throw cogs::InvalidArgumentError("unknown plot kind: " + args.kind);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"COGS: generative-sampling training pipeline for neural TSP solvers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file");

  GenDataArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--kind", gen_args.kind,
                  "uniform | gaussian_mixture | diagonal | clustered_uniform");
  gen->add_option("--n", gen_args.n, "Points per instance");
  gen->add_option("--count", gen_args.count, "Number of instances");
  gen->add_option("--seed", gen_args.seed, "Master seed");
  gen->add_option("--out", gen_args.out, "Output dataset file")->required();
  gen->add_option("--gm-modes-min", gen_args.config.gm_modes_min);
  gen->add_option("--gm-modes-max", gen_args.config.gm_modes_max);
  gen->add_option("--gm-spread", gen_args.config.gm_spread);
  gen->add_option("--diag-band-width", gen_args.config.diag_band_width);
  gen->add_option("--diag-jitter", gen_args.config.diag_jitter);
  gen->add_option("--cu-max-clusters", gen_args.config.cu_max_clusters);
  gen->add_option("--cu-radius-min", gen_args.config.cu_radius_min);
  gen->add_option("--cu-radius-max", gen_args.config.cu_radius_max);
  gen->add_option("--cu-uniform-prob", gen_args.config.cu_uniform_prob);

  BuildTsplibArgs tsplib_args;
  CLI::App* tsplib = app.add_subcommand(
      "build-tsplib50", "Subsample 50-node instances from TSPLib files");
  tsplib->add_option("--tsplib-dir", tsplib_args.dir, "Directory of .tsp files")
      ->required();
  tsplib->add_option("--count", tsplib_args.count, "Number of instances");
  tsplib->add_option("--seed", tsplib_args.seed, "Master seed");
  tsplib->add_option("--out", tsplib_args.out, "Output dataset file")->required();
  tsplib->add_option("--max-source-dim", tsplib_args.max_source_dim,
                     "Skip sources larger than this (0 = no cap)");

  TrainVaeArgs vae_args;
  CLI::App* train_vae = app.add_subcommand(
      "train-vae", "Train the generative model on clustered-uniform data");
  train_vae->add_option("--n", vae_args.n);
  train_vae->add_option("--latent", vae_args.latent);
  train_vae->add_option("--hidden", vae_args.hidden);
  train_vae->add_option("--epochs", vae_args.epochs);
  train_vae->add_option("--batch-size", vae_args.batch_size);
  train_vae->add_option("--batches-per-epoch", vae_args.batches_per_epoch);
  train_vae->add_option("--lr", vae_args.lr);
  train_vae->add_option("--beta-final", vae_args.beta_final);
  train_vae->add_option("--seed", vae_args.seed);
  train_vae->add_option("--out", vae_args.out, "Output checkpoint")->required();
  train_vae->add_option("--history-out", vae_args.history_out,
                        "JSONL loss history");
  train_vae->add_option("--cu-max-clusters", vae_args.gen.cu_max_clusters);
  train_vae->add_option("--cu-radius-min", vae_args.gen.cu_radius_min);
  train_vae->add_option("--cu-radius-max", vae_args.gen.cu_radius_max);
  train_vae->add_option("--cu-uniform-prob", vae_args.gen.cu_uniform_prob);

  SampleVaeArgs sample_args;
  CLI::App* sample_vae =
      app.add_subcommand("sample-vae", "Decode instances from the prior");
  sample_vae->add_option("--model", sample_args.model)->required();
  sample_vae->add_option("--count", sample_args.count);
  sample_vae->add_option("--seed", sample_args.seed);
  sample_vae->add_option("--out", sample_args.out)->required();
  sample_vae->add_option("--pca-train-data", sample_args.pca_train_data,
                         "Dataset of training samples for latent PCA");
  sample_vae->add_option("--pca-out", sample_args.pca_out,
                         "Latent PCA projection JSON");
  sample_vae->add_option("--pca-count", sample_args.pca_count,
                         "Samples per group in the PCA");

  TrainSolverArgs solver_args;
  CLI::App* train_solver =
      app.add_subcommand("train-solver", "Train the attention TSP solver");
  train_solver->add_option("--mode", solver_args.mode,
                           "uniform | hac | cogs | cogs_no_hac | no_vae");
  train_solver->add_option("--n", solver_args.n);
  train_solver->add_option("--epochs", solver_args.epochs);
  train_solver->add_option("--batch-size", solver_args.batch_size);
  train_solver->add_option("--batches-per-epoch", solver_args.batches_per_epoch);
  train_solver->add_option("--lr", solver_args.lr);
  train_solver->add_option("--grad-clip", solver_args.grad_clip);
  train_solver->add_option("--warmup-epochs", solver_args.warmup_epochs);
  train_solver->add_option("--validation-size", solver_args.validation_size);
  train_solver->add_option("--seed", solver_args.seed);
  train_solver->add_option("--embed-dim", solver_args.embed_dim);
  train_solver->add_option("--num-layers", solver_args.num_layers);
  train_solver->add_option("--num-heads", solver_args.num_heads);
  train_solver->add_option("--eta", solver_args.eta, "HAC ascent step size");
  train_solver->add_option("--tau", solver_args.tau,
                           "Re-weighting temperature");
  train_solver->add_option("--vae", solver_args.vae_path, "VAE checkpoint");
  train_solver->add_option("--init", solver_args.init_path,
                           "Warm-started policy checkpoint (skips warmup)");
  train_solver->add_option("--run-dir", solver_args.run_dir)->required();
  train_solver->add_option("--eval-data", solver_args.eval_data,
                           "Dataset for per-epoch gap evaluation");
  train_solver->add_option("--eval-oracle", solver_args.eval_oracle);
  train_solver->add_option("--eval-restarts", solver_args.eval_restarts);
  train_solver->add_option("--eval-stride", solver_args.eval_stride,
                           "Evaluate every k epochs (0 = off)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint");
  eval->add_option("--policy", eval_args.policy)->required();
  eval->add_option("--data", eval_args.data)->required();
  eval->add_option("--oracle", eval_args.oracle,
                   "local_search | held_karp | brute_force");
  eval->add_option("--restarts", eval_args.restarts);
  eval->add_option("--seed", eval_args.seed);
  eval->add_option("--out", eval_args.out, "Report JSON")->required();
  eval->add_option("--dump-worst", eval_args.dump_worst,
                   "Also dump the k worst instances with tours");
  eval->add_option("--dump-out", eval_args.dump_out);

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "Render figures and tables");
  plot->add_option("--kind", plot_args.kind,
                   "gap-epoch | gap-size | gallery | tours | latent | summary-table")
      ->required();
  plot->add_option("--log", plot_args.logs, "Run log(s), one per seed");
  plot->add_option("--metric", plot_args.metric,
                   "mean_gap | worst_1 | worst_05 | worst_01");
  plot->add_option("--records", plot_args.records, "JSONL of {size, gap} rows");
  plot->add_option("--data", plot_args.data, "Dataset file");
  plot->add_option("--count", plot_args.count);
  plot->add_option("--cols", plot_args.cols);
  plot->add_option("--dump", plot_args.dump, "Worst-instance dump JSON");
  plot->add_option("--index", plot_args.index);
  plot->add_option("--pca", plot_args.pca, "Latent PCA JSON");
  plot->add_option("--report", plot_args.reports,
                   "mode=path report entries (repeatable)");
  plot->add_option("--out", plot_args.out, "Output SVG/JSON");
  plot->add_option("--table-out", plot_args.table_out, "Companion data table");
  plot->add_option("--title", plot_args.title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (tsplib->parsed()) return cmd_build_tsplib50(tsplib_args);
    if (train_vae->parsed()) return cmd_train_vae(vae_args);
    if (sample_vae->parsed()) return cmd_sample_vae(sample_args);
    if (train_solver->parsed()) return cmd_train_solver(solver_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (plot->parsed()) return cmd_plot(plot_args);
  } catch (const cogs::InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
