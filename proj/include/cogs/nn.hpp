#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "cogs/core.hpp"

namespace cogs {

/// Flat, named parameter storage shared by the policy and the VAE. Values
/// and gradients live in two contiguous arrays; named entries are column-
/// major matrix views into them. Entry order is the serialization order.
class ParamStore {
public:
  struct Entry {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
  };

  /// Register a parameter matrix. Must not already exist.
  void add(const std::string& name, int rows, int cols);

  MatrixMap value(const std::string& name);
  ConstMatrixMap value(const std::string& name) const;
  MatrixMap grad(const std::string& name);

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& grads() { return grads_; }
  const std::vector<double>& grads() const { return grads_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return values_.size(); }

  void zero_grads();
  double grad_norm() const;
  bool values_finite() const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init for every entry, with
  /// fan_in = rows; entries whose name ends in ".gain" are set to 1 and
  /// names ending in ".bias" or ".shift" to 0.
  void init_uniform(std::uint64_t seed);

private:
  const Entry& find(const std::string& name) const;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

/// Adam with global gradient-norm clipping.
class AdamOptimizer {
public:
  AdamOptimizer(double lr, double clip_norm, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), clip_norm_(clip_norm), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& params);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  std::int64_t steps_taken() const { return t_; }

private:
  double lr_;
  double clip_norm_;
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Versioned checkpoint container shared by policy and VAE checkpoints:
/// a one-line JSON header (kind, hyperparameters, epoch, RNG state, array
/// directory) followed by the raw little-endian doubles of every array in
/// directory order. Loading and re-saving is byte-stable.
struct CheckpointFile {
  std::string kind;
  nlohmann::ordered_json hyperparameters;
  std::int64_t epoch = 0;
  std::string rng_state;
  std::vector<ParamStore::Entry> array_dir;
  std::vector<double> array_data;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::ordered_json& hyperparameters,
                     std::int64_t epoch, const std::string& rng_state,
                     const ParamStore& params);

CheckpointFile load_checkpoint(const std::filesystem::path& path);

/// Restore a ParamStore from a loaded checkpoint; the store must have been
/// built with the same entry layout (names and shapes are verified).
void restore_params(const CheckpointFile& ckpt, ParamStore& params);

// Numerically safe activation helpers.
double stable_sigmoid(double x);

} // namespace cogs
