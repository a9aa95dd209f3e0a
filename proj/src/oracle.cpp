#include "cogs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cogs/errors.hpp"
#include "cogs/rng.hpp"

namespace cogs {

std::string to_string(OracleMethod method) {
  switch (method) {
    case OracleMethod::brute_force: return "brute_force";
    case OracleMethod::held_karp: return "held_karp";
    case OracleMethod::local_search: return "local_search";
    case OracleMethod::external: return "external";
  }
  return "unknown";
}

OracleMethod oracle_method_from_string(const std::string& name) {
  if (name == "brute_force") return OracleMethod::brute_force;
  if (name == "held_karp") return OracleMethod::held_karp;
  if (name == "local_search") return OracleMethod::local_search;
  if (name == "external") return OracleMethod::external;
  throw InvalidArgumentError("unknown oracle method: " + name);
}

std::vector<int> canonicalize_cycle(std::vector<int> order) {
  const int n = static_cast<int>(order.size());
  if (n == 0) return order;
  const auto zero = std::find(order.begin(), order.end(), 0);
  std::rotate(order.begin(), zero, order.end());
  if (n > 2 && order[1] > order[n - 1])
    std::reverse(order.begin() + 1, order.end());
  return order;
}

OracleResult brute_force(const TspInstance& instance) {
  const int n = instance.n();
  if (n < 2) throw InvalidArgumentError("brute_force: n must be >= 2");
  if (n > 10)
    throw SizeLimitError("brute_force: n = " + std::to_string(n) +
                         " exceeds the cap of 10");
  const Eigen::MatrixXd d = distance_matrix(instance);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_len = std::numeric_limits<double>::infinity();
  // Fix index 0 first and keep perm[1] < perm[n-1]: each undirected cycle is
  // visited exactly once, in lexicographic order, so strict improvement
  // yields the lexicographically smallest optimal order.
  do {
    if (n > 2 && perm[1] > perm[n - 1]) continue;
    double len = d(perm[n - 1], perm[0]);
    for (int i = 0; i + 1 < n; ++i) len += d(perm[i], perm[i + 1]);
    if (len < best_len) {
      best_len = len;
      best = perm;
    }
  } while (std::next_permutation(perm.begin() + 1, perm.end()));

  OracleResult res;
  res.tour = make_tour(instance, canonicalize_cycle(std::move(best)));
  res.method = OracleMethod::brute_force;
  res.exact = true;
  return res;
}

OracleResult held_karp(const TspInstance& instance, int max_n) {
  const int n = instance.n();
  if (n < 2) throw InvalidArgumentError("held_karp: n must be >= 2");
  if (n > max_n)
    throw SizeLimitError("held_karp: n = " + std::to_string(n) +
                         " exceeds the cap of " + std::to_string(max_n));
  const Eigen::MatrixXd d = distance_matrix(instance);
  if (n == 2) {
    OracleResult res;
    res.tour = make_tour(instance, {0, 1});
    res.method = OracleMethod::held_karp;
    res.exact = true;
    return res;
  }

  // dp[mask][j]: cheapest path from 0 through exactly the cities of `mask`
  // (over cities 1..n-1), ending at city j+1.
  const int m = n - 1;
  const std::size_t num_masks = std::size_t{1} << m;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(num_masks * m, inf);
  std::vector<std::int8_t> parent(num_masks * m, -1);

  for (int j = 0; j < m; ++j)
    dp[(std::size_t{1} << j) * m + j] = d(0, j + 1);

  for (std::size_t mask = 1; mask < num_masks; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const double cur = dp[mask * m + j];
      if (cur == inf) continue;
      const std::size_t rest = ~mask & (num_masks - 1);
      for (std::size_t bits = rest; bits;) {
        const int k = std::countr_zero(bits);
        bits &= bits - 1;
        const std::size_t next = mask | (std::size_t{1} << k);
        const double cand = cur + d(j + 1, k + 1);
        if (cand < dp[next * m + k]) {
          dp[next * m + k] = cand;
          parent[next * m + k] = static_cast<std::int8_t>(j);
        }
      }
    }
  }

  const std::size_t full = num_masks - 1;
  double best = inf;
  int last = -1;
  for (int j = 0; j < m; ++j) {
    const double cand = dp[full * m + j] + d(j + 1, 0);
    if (cand < best) {
      best = cand;
      last = j;
    }
  }

  std::vector<int> order;
  order.reserve(n);
  std::size_t mask = full;
  int j = last;
  while (j >= 0) {
    order.push_back(j + 1);
    const int p = parent[mask * m + j];
    mask &= ~(std::size_t{1} << j);
    j = p;
  }
  order.push_back(0);
  std::reverse(order.begin(), order.end());

  OracleResult res;
  res.tour = make_tour(instance, canonicalize_cycle(std::move(order)));
  res.method = OracleMethod::held_karp;
  res.exact = true;
  return res;
}

namespace {

std::vector<int> nearest_neighbor_tour(const Eigen::MatrixXd& d, int start) {
  const int n = static_cast<int>(d.rows());
  std::vector<int> tour;
  tour.reserve(n);
  std::vector<bool> visited(n, false);
  int current = start;
  tour.push_back(current);
  visited[current] = true;
  for (int step = 1; step < n; ++step) {
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (!visited[j] && d(current, j) < best) {
        best = d(current, j);
        nearest = j;
      }
    }
    visited[nearest] = true;
    tour.push_back(nearest);
    current = nearest;
  }
  return tour;
}

// 2-opt, first improvement, repeated to a local optimum.
bool two_opt_pass(const Eigen::MatrixXd& d, std::vector<int>& tour) {
  const int n = static_cast<int>(tour.size());
  bool improved_any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n - 1; ++i) {
      const int a = tour[i];
      const int a_next = tour[i + 1];
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue; // same edge
        const int b = tour[j];
        const int b_next = tour[(j + 1) % n];
        const double delta = d(a, b) + d(a_next, b_next) -
                             d(a, a_next) - d(b, b_next);
        if (delta < -1e-12) {
          std::reverse(tour.begin() + i + 1, tour.begin() + j + 1);
          improved = true;
          improved_any = true;
          break;
        }
      }
      if (improved) break;
    }
  }
  return improved_any;
}

// Or-opt: relocate segments of length 1..3 (both orientations), first
// improvement, repeated to a local optimum.
bool or_opt_pass(const Eigen::MatrixXd& d, std::vector<int>& tour) {
  const int n = static_cast<int>(tour.size());
  bool improved_any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int seg_len = 1; seg_len <= 3 && !improved; ++seg_len) {
      if (seg_len >= n - 1) break;
      for (int i = 0; i < n && !improved; ++i) {
        // segment tour[i .. i+seg_len-1] (cyclic), endpoints p before, q after
        const int p = tour[(i - 1 + n) % n];
        const int s0 = tour[i];
        const int s1 = tour[(i + seg_len - 1) % n];
        const int q = tour[(i + seg_len) % n];
        const double removed = d(p, s0) + d(s1, q) - d(p, q);
        if (removed <= 1e-12) continue;
        for (int k = 0; k < n; ++k) {
          // insert between tour[k] and tour[k+1]; skip positions touching
          // the segment itself
          bool overlaps = false;
          for (int t = -1; t <= seg_len - 1; ++t) {
            if ((i + t + n) % n == k) {
              overlaps = true;
              break;
            }
          }
          if (overlaps) continue;
          const int u = tour[k];
          const int v = tour[(k + 1) % n];
          const double add_fwd = d(u, s0) + d(s1, v) - d(u, v);
          const double add_rev = d(u, s1) + d(s0, v) - d(u, v);
          const bool rev = add_rev < add_fwd;
          const double delta = std::min(add_fwd, add_rev) - removed;
          if (delta < -1e-12) {
            std::vector<int> seg(seg_len);
            for (int t = 0; t < seg_len; ++t) seg[t] = tour[(i + t) % n];
            if (rev) std::reverse(seg.begin(), seg.end());
            std::vector<int> rest;
            rest.reserve(n - seg_len);
            for (int t = 0; t < n - seg_len; ++t)
              rest.push_back(tour[(i + seg_len + t) % n]);
            // rebuild: walk `rest` and splice the segment after node u
            std::vector<int> next;
            next.reserve(n);
            for (const int node : rest) {
              next.push_back(node);
              if (node == u)
                next.insert(next.end(), seg.begin(), seg.end());
            }
            tour = std::move(next);
            improved = true;
            improved_any = true;
            break;
          }
        }
      }
    }
  }
  return improved_any;
}

} // namespace

OracleResult local_search_oracle(const TspInstance& instance, int restarts,
                                 std::uint64_t seed) {
  const int n = instance.n();
  if (n < 4)
    throw InvalidArgumentError("local_search_oracle: n must be >= 4");
  if (restarts < 1)
    throw InvalidArgumentError("local_search_oracle: restarts must be >= 1");
  const Eigen::MatrixXd d = distance_matrix(instance);
  Rng rng(seed);

  std::vector<int> best;
  double best_len = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> tour = nearest_neighbor_tour(d, rng.uniform_int(n));
    bool any = true;
    while (any) {
      any = two_opt_pass(d, tour);
      any = or_opt_pass(d, tour) || any;
    }
    double len = d(tour[n - 1], tour[0]);
    for (int i = 0; i + 1 < n; ++i) len += d(tour[i], tour[i + 1]);
    if (len < best_len) {
      best_len = len;
      best = std::move(tour);
    }
  }

  OracleResult res;
  res.tour = make_tour(instance, canonicalize_cycle(std::move(best)));
  res.method = OracleMethod::local_search;
  res.exact = false;
  return res;
}

std::string write_external_solver_file(const TspInstance& instance,
                                       std::int64_t scale,
                                       const std::string& name) {
  if (scale <= 0)
    throw InvalidArgumentError("write_external_solver_file: scale must be > 0");
  validate_instance(instance);
  std::ostringstream os;
  os << "NAME : " << name << "\n";
  os << "TYPE : TSP\n";
  os << "COMMENT : unit-square instance scaled by " << scale << "\n";
  os << "DIMENSION : " << instance.n() << "\n";
  os << "EDGE_WEIGHT_TYPE : EUC_2D\n";
  os << "NODE_COORD_SECTION\n";
  for (int i = 0; i < instance.n(); ++i) {
    const auto& p = instance.points[i];
    os << (i + 1) << " " << std::llround(p.x * static_cast<double>(scale))
       << " " << std::llround(p.y * static_cast<double>(scale)) << "\n";
  }
  os << "EOF\n";
  return os.str();
}

OracleResult read_external_tour(std::string_view text,
                                const TspInstance& instance) {
  const int n = instance.n();
  std::vector<long> tokens;
  std::istringstream is{std::string{text}};
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    long v;
    std::vector<long> line_tokens;
    bool numeric = true;
    std::string word;
    while (ls >> word) {
      try {
        std::size_t used = 0;
        v = std::stol(word, &used);
        if (used != word.size()) throw std::invalid_argument(word);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
      line_tokens.push_back(v);
    }
    if (!numeric) continue; // header line (NAME:, TOUR_SECTION, ...)
    tokens.insert(tokens.end(), line_tokens.begin(), line_tokens.end());
  }
  while (!tokens.empty() && tokens.back() == -1) tokens.pop_back();
  // Concorde-style leading count line.
  if (static_cast<int>(tokens.size()) == n + 1 && tokens.front() == n)
    tokens.erase(tokens.begin());
  if (static_cast<int>(tokens.size()) != n)
    throw ParseError("external tour: expected " + std::to_string(n) +
                     " node indices, found " + std::to_string(tokens.size()));

  const auto [mn, mx] = std::minmax_element(tokens.begin(), tokens.end());
  int shift = 0;
  if (*mn == 1 && *mx == n) shift = 1;       // 1-based
  else if (*mn == 0 && *mx == n - 1) shift = 0; // 0-based
  else
    throw ParseError("external tour: index range [" + std::to_string(*mn) +
                     ", " + std::to_string(*mx) + "] is neither 0- nor 1-based");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = static_cast<int>(tokens[i]) - shift;
  if (!is_permutation_of_n(order, n))
    throw ParseError("external tour: node indices are not a permutation");

  OracleResult res;
  res.tour = make_tour(instance, canonicalize_cycle(std::move(order)));
  res.method = OracleMethod::external;
  res.exact = true;
  return res;
}

} // namespace cogs
