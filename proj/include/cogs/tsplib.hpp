#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cogs/core.hpp"

namespace cogs {

/// One parsed TSPLib file. Only EUC_2D instances are accepted; coordinates
/// are kept in their original units.
struct TsplibInstance {
  std::string name;
  int dimension = 0;
  std::string edge_weight_type; // always "EUC_2D" after a successful parse
  struct RawNode {
    int id;
    double x;
    double y;
  };
  std::vector<RawNode> raw_points;
};

/// Where each generated TSPLib50 instance came from.
struct ProvenanceRecord {
  std::string source_name;
  std::uint64_t seed = 0;
};

struct Tsplib50Dataset {
  std::vector<TspInstance> instances; // every instance has exactly 50 points
  std::vector<ProvenanceRecord> provenance;
  std::uint64_t master_seed = 0;
};

/// Parse TSPLib plain text: `KEY : VALUE` headers (whitespace-tolerant),
/// NODE_COORD_SECTION with `id x y` triples, optional EOF terminator.
/// Throws ParseError for structural problems and UnsupportedFormatError
/// (naming the type) for any EDGE_WEIGHT_TYPE other than EUC_2D.
TsplibInstance parse_tsplib(std::string_view text);

inline constexpr int kTsplib50Points = 50;

/// Pick `points_per_instance` distinct nodes uniformly without replacement,
/// then normalize into the unit square. Throws SizeLimitError when the
/// source has fewer nodes than requested.
TspInstance sample_tsplib50_instance(const TsplibInstance& source,
                                     std::uint64_t seed,
                                     int points_per_instance = kTsplib50Points);

/// Build a TSPLib50 dataset: for each of `size` instances pick a source
/// uniformly at random, then subsample it with an instance-specific derived
/// seed. Sources must already be filtered for eligibility (EUC_2D,
/// dimension >= 50); an empty source list is an error.
Tsplib50Dataset build_tsplib50(const std::vector<TsplibInstance>& sources,
                               int size, std::uint64_t master_seed);

/// Eligibility rule shared by the builder and the CLI: EUC_2D with at least
/// 50 nodes, optionally capped at `max_dimension` (0 = no cap).
bool tsplib50_eligible(const TsplibInstance& source, int max_dimension = 0);

} // namespace cogs
