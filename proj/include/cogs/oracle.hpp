#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cogs/core.hpp"

namespace cogs {

enum class OracleMethod { brute_force, held_karp, local_search, external };

std::string to_string(OracleMethod method);
OracleMethod oracle_method_from_string(const std::string& name);

/// A reference tour. `exact` is true when the length is provably the global
/// minimum (brute force, Held-Karp, or an external exact solver).
struct OracleResult {
  Tour tour;
  OracleMethod method = OracleMethod::brute_force;
  bool exact = false;
};

/// Canonical cycle form used everywhere a tour is reported: index 0 first,
/// second element smaller than the last (orientation fixed).
std::vector<int> canonicalize_cycle(std::vector<int> order);

/// Exhaustive search over all (n-1)!/2 distinct cycles. n <= 10.
/// Ties are broken toward the lexicographically smallest canonical order.
OracleResult brute_force(const TspInstance& instance);

inline constexpr int kHeldKarpMaxN = 18;

/// Exact optimum via subset dynamic programming, O(n^2 2^n) time and
/// O(n 2^n) memory. The default cap keeps memory under ~25 MB.
OracleResult held_karp(const TspInstance& instance, int max_n = kHeldKarpMaxN);

/// Near-optimal surrogate for sizes beyond exact reach: best tour over
/// `restarts` runs of nearest-neighbor construction followed by 2-opt and
/// Or-opt (segment lengths 1-3) local optimization, repeated until neither
/// move improves.
OracleResult local_search_oracle(const TspInstance& instance, int restarts,
                                 std::uint64_t seed);

/// Emit a EUC_2D TSPLib file with coordinates scaled by `scale` and rounded
/// to integers, for handing the instance to an external exact solver.
std::string write_external_solver_file(const TspInstance& instance,
                                       std::int64_t scale = 10'000'000,
                                       const std::string& name = "cogs");

/// Read a tour file produced by an external solver: header lines are
/// skipped, node indices are collected one per line (0- or 1-based,
/// auto-detected by range; a leading count line and a -1 terminator are
/// tolerated). The tour is validated as a permutation and its length is
/// recomputed on the original, unscaled instance.
OracleResult read_external_tour(std::string_view text,
                                const TspInstance& instance);

} // namespace cogs
