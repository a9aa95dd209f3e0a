#include "cogs/tsplib.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "cogs/errors.hpp"
#include "cogs/rng.hpp"

namespace cogs {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

TsplibInstance parse_tsplib(std::string_view text) {
  TsplibInstance out;
  bool have_dimension = false;
  bool in_coords = false;
  std::set<int> seen_ids;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    line = trim(line);
    if (line.empty()) continue;
    if (line == "EOF") break;

    if (!in_coords) {
      if (line == "NODE_COORD_SECTION") {
        in_coords = true;
        continue;
      }
      const std::size_t colon = line.find(':');
      if (colon == std::string_view::npos) continue; // tolerate unknown lines
      const std::string key{trim(line.substr(0, colon))};
      const std::string value{trim(line.substr(colon + 1))};
      if (key == "NAME") {
        out.name = value;
      } else if (key == "DIMENSION") {
        try {
          out.dimension = std::stoi(value);
        } catch (const std::exception&) {
          throw ParseError("TSPLib: DIMENSION is not an integer: " + value);
        }
        have_dimension = true;
      } else if (key == "EDGE_WEIGHT_TYPE") {
        out.edge_weight_type = value;
        if (value != "EUC_2D")
          throw UnsupportedFormatError("TSPLib: unsupported EDGE_WEIGHT_TYPE " +
                                       value + " (only EUC_2D is accepted)");
      }
      continue;
    }

    // Coordinate line: "id x y".
    std::istringstream is{std::string{line}};
    TsplibInstance::RawNode node{};
    if (!(is >> node.id >> node.x >> node.y))
      throw ParseError("TSPLib: malformed coordinate line: " + std::string{line});
    if (!seen_ids.insert(node.id).second)
      throw ParseError("TSPLib: duplicate node id " + std::to_string(node.id));
    out.raw_points.push_back(node);
  }

  if (!have_dimension) throw ParseError("TSPLib: missing DIMENSION header");
  if (out.edge_weight_type.empty())
    throw ParseError("TSPLib: missing EDGE_WEIGHT_TYPE header");
  if (static_cast<int>(out.raw_points.size()) != out.dimension)
    throw ParseError("TSPLib: DIMENSION is " + std::to_string(out.dimension) +
                     " but " + std::to_string(out.raw_points.size()) +
                     " coordinates were found");
  return out;
}

TspInstance sample_tsplib50_instance(const TsplibInstance& source,
                                     std::uint64_t seed,
                                     int points_per_instance) {
  const int dim = source.dimension;
  if (dim < points_per_instance)
    throw SizeLimitError("tsplib50: source " + source.name + " has " +
                         std::to_string(dim) + " nodes, need at least " +
                         std::to_string(points_per_instance));
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots end up as a uniform draw
  // without replacement.
  std::vector<int> idx(dim);
  for (int i = 0; i < dim; ++i) idx[i] = i;
  std::vector<Point> picked;
  picked.reserve(points_per_instance);
  for (int i = 0; i < points_per_instance; ++i) {
    const int j = i + rng.uniform_int(dim - i);
    std::swap(idx[i], idx[j]);
    const auto& node = source.raw_points[idx[i]];
    picked.push_back({node.x, node.y});
  }
  return normalize_to_unit_square(picked);
}

bool tsplib50_eligible(const TsplibInstance& source, int max_dimension) {
  if (source.edge_weight_type != "EUC_2D") return false;
  if (source.dimension < kTsplib50Points) return false;
  if (max_dimension > 0 && source.dimension > max_dimension) return false;
  return true;
}

Tsplib50Dataset build_tsplib50(const std::vector<TsplibInstance>& sources,
                               int size, std::uint64_t master_seed) {
  if (sources.empty())
    throw InvalidArgumentError("tsplib50: no eligible source instances");
  if (size < 0) throw InvalidArgumentError("tsplib50: negative size");
  Tsplib50Dataset out;
  out.master_seed = master_seed;
  out.instances.resize(size);
  out.provenance.resize(size);
  const int num_sources = static_cast<int>(sources.size());
  for (int i = 0; i < size; ++i) {
    Rng pick(derive_seed(master_seed, "tsplib50.pick", i));
    const int s = pick.uniform_int(num_sources);
    const std::uint64_t inst_seed = derive_seed(master_seed, "tsplib50.sample", i);
    out.instances[i] = sample_tsplib50_instance(sources[s], inst_seed);
    out.provenance[i] = {sources[s].name, inst_seed};
  }
  return out;
}

} // namespace cogs
