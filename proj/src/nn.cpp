#include "cogs/nn.hpp"

#include <cmath>
#include <cstring>

#include "cogs/dataset_io.hpp"
#include "cogs/errors.hpp"
#include "cogs/rng.hpp"

namespace cogs {

void ParamStore::add(const std::string& name, int rows, int cols) {
  if (index_.contains(name))
    throw InvalidArgumentError("ParamStore: duplicate parameter " + name);
  if (rows <= 0 || cols <= 0)
    throw InvalidArgumentError("ParamStore: bad shape for " + name);
  Entry e{name, rows, cols, values_.size()};
  index_[name] = entries_.size();
  entries_.push_back(e);
  values_.resize(values_.size() + static_cast<std::size_t>(rows) * cols, 0.0);
  grads_.resize(values_.size(), 0.0);
}

const ParamStore::Entry& ParamStore::find(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end())
    throw InvalidArgumentError("ParamStore: unknown parameter " + name);
  return entries_[it->second];
}

MatrixMap ParamStore::value(const std::string& name) {
  const Entry& e = find(name);
  return MatrixMap(values_.data() + e.offset, e.rows, e.cols);
}

ConstMatrixMap ParamStore::value(const std::string& name) const {
  const Entry& e = find(name);
  return ConstMatrixMap(values_.data() + e.offset, e.rows, e.cols);
}

MatrixMap ParamStore::grad(const std::string& name) {
  const Entry& e = find(name);
  return MatrixMap(grads_.data() + e.offset, e.rows, e.cols);
}

void ParamStore::zero_grads() {
  std::fill(grads_.begin(), grads_.end(), 0.0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const double g : grads_) sq += g * g;
  return std::sqrt(sq);
}

bool ParamStore::values_finite() const {
  for (const double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void ParamStore::init_uniform(std::uint64_t seed) {
  Rng rng(seed);
  for (const Entry& e : entries_) {
    double* data = values_.data() + e.offset;
    const std::size_t count = static_cast<std::size_t>(e.rows) * e.cols;
    if (e.name.ends_with(".gain")) {
      std::fill(data, data + count, 1.0);
      continue;
    }
    if (e.name.ends_with(".bias") || e.name.ends_with(".shift")) {
      std::fill(data, data + count, 0.0);
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(e.rows));
    for (std::size_t i = 0; i < count; ++i)
      data[i] = rng.uniform(-bound, bound);
  }
}

void AdamOptimizer::step(ParamStore& params) {
  auto& values = params.values();
  auto& grads = params.grads();
  if (m_.empty()) {
    m_.assign(values.size(), 0.0);
    v_.assign(values.size(), 0.0);
  }
  if (m_.size() != values.size())
    throw InvalidArgumentError("AdamOptimizer: parameter count changed");

  double norm = 0.0;
  for (const double g : grads) norm += g * g;
  norm = std::sqrt(norm);
  if (!std::isfinite(norm))
    throw NumericalFailureError("AdamOptimizer: non-finite gradient norm");
  const double scale = (clip_norm_ > 0.0 && norm > clip_norm_)
                           ? clip_norm_ / norm
                           : 1.0;

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads[i] * scale;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

namespace {
constexpr std::string_view kCheckpointMagic = "COGSCKPT 1";
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::ordered_json& hyperparameters,
                     std::int64_t epoch, const std::string& rng_state,
                     const ParamStore& params) {
  nlohmann::ordered_json header;
  header["format"] = "cogs.checkpoint";
  header["version"] = 1;
  header["kind"] = kind;
  header["hyperparameters"] = hyperparameters;
  header["epoch"] = epoch;
  header["rng"] = rng_state;
  nlohmann::ordered_json arrays = nlohmann::ordered_json::array();
  for (const auto& e : params.entries()) {
    nlohmann::ordered_json a;
    a["name"] = e.name;
    a["rows"] = e.rows;
    a["cols"] = e.cols;
    arrays.push_back(a);
  }
  header["arrays"] = arrays;

  std::string out;
  out += kCheckpointMagic;
  out += '\n';
  out += header.dump();
  out += '\n';
  const auto& values = params.values();
  out.append(reinterpret_cast<const char*>(values.data()),
             values.size() * sizeof(double));
  write_file_atomic(path, out);
}

CheckpointFile load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::size_t first_nl = bytes.find('\n');
  if (first_nl == std::string::npos ||
      std::string_view(bytes).substr(0, first_nl) != kCheckpointMagic)
    throw ParseError("checkpoint: bad magic line");
  const std::size_t second_nl = bytes.find('\n', first_nl + 1);
  if (second_nl == std::string::npos)
    throw ParseError("checkpoint: missing header line");
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(
        bytes.substr(first_nl + 1, second_nl - first_nl - 1));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad header JSON: ") + e.what());
  }

  CheckpointFile out;
  out.kind = header.at("kind").get<std::string>();
  out.hyperparameters = header.at("hyperparameters");
  out.epoch = header.at("epoch").get<std::int64_t>();
  out.rng_state = header.at("rng").get<std::string>();
  std::size_t total = 0;
  for (const auto& a : header.at("arrays")) {
    ParamStore::Entry e;
    e.name = a.at("name").get<std::string>();
    e.rows = a.at("rows").get<int>();
    e.cols = a.at("cols").get<int>();
    e.offset = total;
    total += static_cast<std::size_t>(e.rows) * e.cols;
    out.array_dir.push_back(e);
  }
  const std::size_t expected = total * sizeof(double);
  const std::size_t body_size = bytes.size() - second_nl - 1;
  if (body_size != expected)
    throw ParseError("checkpoint: body has " + std::to_string(body_size) +
                     " bytes, expected " + std::to_string(expected));
  out.array_data.resize(total);
  std::memcpy(out.array_data.data(), bytes.data() + second_nl + 1, expected);
  return out;
}

void restore_params(const CheckpointFile& ckpt, ParamStore& params) {
  if (ckpt.array_dir.size() != params.entries().size())
    throw InvalidArgumentError("checkpoint: array count mismatch");
  for (std::size_t i = 0; i < ckpt.array_dir.size(); ++i) {
    const auto& a = ckpt.array_dir[i];
    const auto& e = params.entries()[i];
    if (a.name != e.name || a.rows != e.rows || a.cols != e.cols)
      throw InvalidArgumentError("checkpoint: layout mismatch at " + a.name);
  }
  if (ckpt.array_data.size() != params.size())
    throw InvalidArgumentError("checkpoint: data size mismatch");
  std::copy(ckpt.array_data.begin(), ckpt.array_data.end(),
            params.values().begin());
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

} // namespace cogs
