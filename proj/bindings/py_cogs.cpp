// Python bindings for the main COGS operations: instance generation,
// oracles, gap statistics, the attention policy, and the VAE.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cogs/core.hpp"
#include "cogs/distributions.hpp"
#include "cogs/hac.hpp"
#include "cogs/oracle.hpp"
#include "cogs/pipeline.hpp"
#include "cogs/policy.hpp"
#include "cogs/stats.hpp"
#include "cogs/tsplib.hpp"
#include "cogs/vae.hpp"

namespace py = pybind11;

namespace {

cogs::TspInstance instance_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 2)
    throw std::invalid_argument("instance array must have shape (n, 2)");
  cogs::TspInstance inst;
  inst.points.reserve(arr.shape(0));
  const auto view = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < arr.shape(0); ++i)
    inst.points.push_back({view(i, 0), view(i, 1)});
  return inst;
}

py::array_t<double> instance_to_array(const cogs::TspInstance& inst) {
  py::array_t<double> arr({inst.n(), 2});
  auto view = arr.mutable_unchecked<2>();
  for (int i = 0; i < inst.n(); ++i) {
    view(i, 0) = inst.points[i].x;
    view(i, 1) = inst.points[i].y;
  }
  return arr;
}

std::vector<cogs::TspInstance> batch_from_list(const py::list& instances) {
  std::vector<cogs::TspInstance> batch;
  batch.reserve(instances.size());
  for (const auto& item : instances)
    batch.push_back(instance_from_array(
        item.cast<py::array_t<double, py::array::c_style | py::array::forcecast>>()));
  return batch;
}

py::dict oracle_result_to_dict(const cogs::OracleResult& res) {
  py::dict d;
  d["order"] = res.tour.order;
  d["length"] = res.tour.length;
  d["method"] = cogs::to_string(res.method);
  d["exact"] = res.exact;
  return d;
}

} // namespace

PYBIND11_MODULE(_cogs, m) {
  m.doc() = "COGS: generative-sampling training pipeline for neural TSP solvers";

  // ---- core ----
  m.def("distance_matrix", [](const py::array_t<double>& pts) {
    return cogs::distance_matrix(instance_from_array(pts));
  });
  m.def("tour_length", [](const py::array_t<double>& pts,
                          const std::vector<int>& order) {
    return cogs::tour_length(instance_from_array(pts), order);
  });
  m.def("optimality_gap", &cogs::optimality_gap, py::arg("model_cost"),
        py::arg("oracle_cost"));
  m.def("normalize_to_unit_square", [](const py::array_t<double>& pts) {
    return instance_to_array(
        cogs::normalize_to_unit_square(instance_from_array(pts).points));
  });

  // ---- distributions ----
  m.def("sample_uniform", [](int n, std::uint64_t seed) {
    return instance_to_array(cogs::sample_uniform(n, seed));
  });
  m.def(
      "sample_gaussian_mixture",
      [](int n, int num_modes, double spread, std::uint64_t seed) {
        return instance_to_array(
            cogs::sample_gaussian_mixture(n, num_modes, spread, seed));
      },
      py::arg("n"), py::arg("num_modes") = 3, py::arg("spread") = 0.1,
      py::arg("seed") = 0);
  m.def(
      "sample_diagonal",
      [](int n, double band_width, double jitter, std::uint64_t seed) {
        return instance_to_array(
            cogs::sample_diagonal(n, band_width, jitter, seed));
      },
      py::arg("n"), py::arg("band_width") = 0.1, py::arg("jitter") = 0.02,
      py::arg("seed") = 0);
  m.def(
      "sample_clustered_uniform",
      [](int n, int max_clusters, double radius_min, double radius_max,
         double uniform_prob, std::uint64_t seed) {
        return instance_to_array(cogs::sample_clustered_uniform(
            n, max_clusters, radius_min, radius_max, uniform_prob, seed));
      },
      py::arg("n"), py::arg("max_clusters") = 8, py::arg("radius_min") = 0.05,
      py::arg("radius_max") = 0.25, py::arg("uniform_prob") = 0.2,
      py::arg("seed") = 0);

  // ---- oracles ----
  m.def("brute_force", [](const py::array_t<double>& pts) {
    return oracle_result_to_dict(cogs::brute_force(instance_from_array(pts)));
  });
  m.def(
      "held_karp",
      [](const py::array_t<double>& pts, int max_n) {
        return oracle_result_to_dict(
            cogs::held_karp(instance_from_array(pts), max_n));
      },
      py::arg("points"), py::arg("max_n") = cogs::kHeldKarpMaxN);
  m.def(
      "local_search",
      [](const py::array_t<double>& pts, int restarts, std::uint64_t seed) {
        return oracle_result_to_dict(
            cogs::local_search_oracle(instance_from_array(pts), restarts, seed));
      },
      py::arg("points"), py::arg("restarts") = 50, py::arg("seed") = 0);
  m.def("write_tsplib", [](const py::array_t<double>& pts, std::int64_t scale) {
    return cogs::write_external_solver_file(instance_from_array(pts), scale);
  }, py::arg("points"), py::arg("scale") = 10'000'000);
  m.def("parse_tsplib", [](const std::string& text) {
    const cogs::TsplibInstance inst = cogs::parse_tsplib(text);
    py::dict d;
    d["name"] = inst.name;
    d["dimension"] = inst.dimension;
    d["edge_weight_type"] = inst.edge_weight_type;
    py::list coords;
    for (const auto& node : inst.raw_points)
      coords.append(py::make_tuple(node.id, node.x, node.y));
    d["nodes"] = coords;
    return d;
  });

  // ---- stats / hac ----
  m.def("worst_tail_mean", [](const std::vector<double>& gaps, double pct) {
    return cogs::worst_tail_mean(gaps, pct);
  });
  m.def("pearson_correlation", [](const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
    return cogs::pearson_correlation(xs, ys);
  });
  m.def("welch_t_test", [](const std::vector<double>& a,
                           const std::vector<double>& b) {
    const cogs::WelchResult res = cogs::welch_t_test(a, b);
    py::dict d;
    d["t"] = res.t;
    d["dof"] = res.dof;
    d["p"] = res.p;
    return d;
  });
  m.def(
      "reweight",
      [](const std::vector<double>& scores, double tau) {
        return cogs::reweight(scores, tau);
      },
      py::arg("hardness_scores"), py::arg("tau") = 0.5);

  // ---- policy ----
  py::class_<cogs::SolverPolicy>(m, "SolverPolicy")
      .def_static(
          "create",
          [](int embed_dim, int num_layers, int num_heads, std::uint64_t seed) {
            cogs::PolicyConfig config;
            config.embed_dim = embed_dim;
            config.num_layers = num_layers;
            config.num_heads = num_heads;
            config.ffn_dim = 4 * embed_dim;
            return cogs::SolverPolicy::create(config, seed);
          },
          py::arg("embed_dim") = 128, py::arg("num_layers") = 3,
          py::arg("num_heads") = 8, py::arg("seed") = 0)
      .def_static("load",
                  [](const std::string& path) {
                    return cogs::load_policy(path).policy;
                  })
      .def("save",
           [](const cogs::SolverPolicy& self, const std::string& path) {
             cogs::save_policy(path, self);
           },
           py::arg("path"))
      .def("greedy_decode",
           [](const cogs::SolverPolicy& self, const py::list& instances) {
             const auto batch = batch_from_list(instances);
             py::list out;
             for (const auto& res : cogs::greedy_decode(self, batch)) {
               py::dict d;
               d["order"] = res.tour.order;
               d["length"] = res.tour.length;
               d["log_probability"] = res.log_probability;
               out.append(d);
             }
             return out;
           },
           py::arg("instances"))
      .def("log_probability",
           [](const cogs::SolverPolicy& self, const py::array_t<double>& pts,
              const std::vector<int>& order) {
             return cogs::log_probability(self, instance_from_array(pts), order);
           },
           py::arg("points"), py::arg("order"))
      .def_property_readonly("num_parameters", [](const cogs::SolverPolicy& p) {
        return p.params.size();
      });

  // ---- vae ----
  py::class_<cogs::VaeModel>(m, "VaeModel")
      .def_static(
          "create",
          [](int n, int latent_dim, int hidden_dim, std::uint64_t seed) {
            return cogs::VaeModel::create({n, latent_dim, hidden_dim}, seed);
          },
          py::arg("n") = 50, py::arg("latent_dim") = 32,
          py::arg("hidden_dim") = 128, py::arg("seed") = 0)
      .def_static("load",
                  [](const std::string& path) {
                    return cogs::load_vae(path).model;
                  })
      .def("save",
           [](const cogs::VaeModel& self, const std::string& path) {
             cogs::save_vae(path, self);
           },
           py::arg("path"))
      .def("sample",
           [](const cogs::VaeModel& self, int count, std::uint64_t seed) {
             py::list out;
             for (const auto& inst : cogs::sample_instances(self, count, seed))
               out.append(instance_to_array(inst));
             return out;
           },
           py::arg("count"), py::arg("seed") = 0)
      .def("encode_mean",
           [](const cogs::VaeModel& self, const py::array_t<double>& pts) {
             return cogs::encode_mean(self, instance_from_array(pts));
           },
           py::arg("points"))
      .def("train",
           [](cogs::VaeModel& self, int epochs, int batch_size,
              int batches_per_epoch, double learning_rate, std::uint64_t seed) {
             cogs::GeneratorConfig gen;
             gen.kind = cogs::GeneratorKind::clustered_uniform;
             gen.n = self.config.n;
             cogs::VaeTrainConfig train;
             train.epochs = epochs;
             train.batch_size = batch_size;
             train.batches_per_epoch = batches_per_epoch;
             train.learning_rate = learning_rate;
             py::list history;
             for (const auto& row : cogs::train_vae(self, gen, train, seed)) {
               py::dict d;
               d["epoch"] = row.epoch;
               d["reconstruction"] = row.reconstruction;
               d["kl"] = row.kl;
               d["beta"] = row.beta;
               history.append(d);
             }
             return history;
           },
           py::arg("epochs") = 10, py::arg("batch_size") = 32,
           py::arg("batches_per_epoch") = 4, py::arg("learning_rate") = 1e-3,
           py::arg("seed") = 0);

  m.attr("__version__") = "1.0.0";
}
