#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cogs/core.hpp"
#include "cogs/distributions.hpp"

namespace cogs {

/// On-disk dataset: a magic line, a one-line JSON header with canonical
/// field order, then count*n*2 little-endian IEEE-754 doubles. Parsing and
/// re-serializing a file produced by this writer is byte-identical.
struct DatasetFile {
  int count = 0;
  int n = 0;
  nlohmann::ordered_json generator; // {"kind": ..., parameters...}
  std::uint64_t master_seed = 0;
  std::string provenance; // manifest filename or free-form note ("" = none)
  std::vector<TspInstance> instances;
};

inline constexpr std::string_view kDatasetMagic = "COGSDATA 1";

std::string serialize_dataset(const DatasetFile& dataset);
DatasetFile parse_dataset(std::string_view bytes);

void save_dataset(const std::filesystem::path& path, const DatasetFile& dataset);
DatasetFile load_dataset(const std::filesystem::path& path);

/// Header snippet describing a GeneratorConfig (canonical key order).
nlohmann::ordered_json generator_to_json(const GeneratorConfig& config);
GeneratorConfig generator_from_json(const nlohmann::json& j);

/// Write via a temporary file in the same directory, then rename, so
/// partially written outputs are never observed. Creates parent dirs.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Append one JSON object as a line to a JSONL log.
void append_jsonl(const std::filesystem::path& path, const nlohmann::json& row);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

} // namespace cogs
