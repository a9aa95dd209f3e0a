#include "cogs/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cogs/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset format assumes a little-endian host");

namespace cogs {

std::string serialize_dataset(const DatasetFile& dataset) {
  if (static_cast<int>(dataset.instances.size()) != dataset.count)
    throw InvalidArgumentError("dataset: declared count does not match body");
  nlohmann::ordered_json header;
  header["format"] = "cogs.dataset";
  header["version"] = 1;
  header["count"] = dataset.count;
  header["n"] = dataset.n;
  header["generator"] = dataset.generator;
  header["master_seed"] = dataset.master_seed;
  header["provenance"] = dataset.provenance;

  std::string out;
  out += kDatasetMagic;
  out += '\n';
  out += header.dump();
  out += '\n';
  out.reserve(out.size() + sizeof(double) * 2 * dataset.count * dataset.n);
  for (const auto& inst : dataset.instances) {
    if (inst.n() != dataset.n)
      throw InvalidArgumentError("dataset: instance size differs from header n");
    for (const auto& p : inst.points) {
      char buf[2 * sizeof(double)];
      std::memcpy(buf, &p.x, sizeof(double));
      std::memcpy(buf + sizeof(double), &p.y, sizeof(double));
      out.append(buf, sizeof(buf));
    }
  }
  return out;
}

DatasetFile parse_dataset(std::string_view bytes) {
  const std::size_t first_nl = bytes.find('\n');
  if (first_nl == std::string_view::npos ||
      bytes.substr(0, first_nl) != kDatasetMagic)
    throw ParseError("dataset: bad magic line");
  const std::size_t second_nl = bytes.find('\n', first_nl + 1);
  if (second_nl == std::string_view::npos)
    throw ParseError("dataset: missing header line");
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(
        bytes.substr(first_nl + 1, second_nl - first_nl - 1));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: bad header JSON: ") + e.what());
  }

  DatasetFile out;
  out.count = header.at("count").get<int>();
  out.n = header.at("n").get<int>();
  out.generator = header.at("generator");
  out.master_seed = header.at("master_seed").get<std::uint64_t>();
  out.provenance = header.at("provenance").get<std::string>();

  const std::string_view body = bytes.substr(second_nl + 1);
  const std::size_t expected =
      sizeof(double) * 2 * static_cast<std::size_t>(out.count) * out.n;
  if (body.size() != expected)
    throw ParseError("dataset: body has " + std::to_string(body.size()) +
                     " bytes, expected " + std::to_string(expected));
  out.instances.resize(out.count);
  const char* cursor = body.data();
  for (auto& inst : out.instances) {
    inst.points.resize(out.n);
    for (auto& p : inst.points) {
      std::memcpy(&p.x, cursor, sizeof(double));
      std::memcpy(&p.y, cursor + sizeof(double), sizeof(double));
      cursor += 2 * sizeof(double);
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const DatasetFile& dataset) {
  write_file_atomic(path, serialize_dataset(dataset));
}

DatasetFile load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

nlohmann::ordered_json generator_to_json(const GeneratorConfig& config) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(config.kind);
  j["n"] = config.n;
  switch (config.kind) {
    case GeneratorKind::uniform:
      break;
    case GeneratorKind::gaussian_mixture:
      j["modes_min"] = config.gm_modes_min;
      j["modes_max"] = config.gm_modes_max;
      j["extent"] = config.gm_extent;
      j["spread"] = config.gm_spread;
      break;
    case GeneratorKind::diagonal:
      j["band_width"] = config.diag_band_width;
      j["jitter"] = config.diag_jitter;
      break;
    case GeneratorKind::clustered_uniform:
      j["max_clusters"] = config.cu_max_clusters;
      j["radius_min"] = config.cu_radius_min;
      j["radius_max"] = config.cu_radius_max;
      j["uniform_prob"] = config.cu_uniform_prob;
      break;
  }
  return j;
}

GeneratorConfig generator_from_json(const nlohmann::json& j) {
  GeneratorConfig config;
  config.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  config.n = j.at("n").get<int>();
  switch (config.kind) {
    case GeneratorKind::uniform:
      break;
    case GeneratorKind::gaussian_mixture:
      config.gm_modes_min = j.at("modes_min").get<int>();
      config.gm_modes_max = j.at("modes_max").get<int>();
      config.gm_extent = j.at("extent").get<double>();
      config.gm_spread = j.at("spread").get<double>();
      break;
    case GeneratorKind::diagonal:
      config.diag_band_width = j.at("band_width").get<double>();
      config.diag_jitter = j.at("jitter").get<double>();
      break;
    case GeneratorKind::clustered_uniform:
      config.cu_max_clusters = j.at("max_clusters").get<int>();
      config.cu_radius_min = j.at("radius_min").get<double>();
      config.cu_radius_max = j.at("radius_max").get<double>();
      config.cu_uniform_prob = j.at("uniform_prob").get<double>();
      break;
  }
  config.validate();
  return config;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open for writing: " + tmp.string());
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path.string());
  std::string out{std::istreambuf_iterator<char>(is),
                  std::istreambuf_iterator<char>()};
  return out;
}

void append_jsonl(const std::filesystem::path& path, const nlohmann::json& row) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  std::ofstream os(path, std::ios::app);
  if (!os) throw Error("cannot open for append: " + path.string());
  os << row.dump() << '\n';
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

} // namespace cogs
