#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/graph.hpp"
#include "siot/partition.hpp"

namespace siot {

namespace detail {
inline void check_scorable(const WeightedGraph& g, const Partition& p) {
  if (p.size() != g.n()) {
    fail(ErrorCode::LengthMismatch, "partition has " + std::to_string(p.size()) + " nodes, graph has " +
                                        std::to_string(g.n()));
  }
  if (!(g.total_weight() > 0.0)) fail(ErrorCode::DegenerateGraph, "graph has no edge weight (m = 0)");
}
}  // namespace detail

/// Weighted Newman modularity. Evaluated per cluster as
/// sum_c [ in_c / 2m - (tot_c / 2m)^2 ], where in_c counts each intra edge twice
/// (ordered pairs) and tot_c is the summed strength of the cluster.
inline double modularity(const WeightedGraph& g, const Partition& p) {
  detail::check_scorable(g, p);
  const double two_m = 2.0 * g.total_weight();
  std::vector<double> inside(p.num_clusters, 0.0);
  std::vector<double> total(p.num_clusters, 0.0);
  // Strength totals are accumulated in edge order so a single cluster reproduces 2m bit-exactly.
  for (const auto& e : g.edges()) {
    const auto cu = p.assignment[e.u], cv = p.assignment[e.v];
    if (cu == cv) {
      inside[cu] += 2.0 * e.w;
      total[cu] += 2.0 * e.w;
    } else {
      total[cu] += e.w;
      total[cv] += e.w;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < p.num_clusters; ++c) {
    const double share = total[c] / two_m;
    q += inside[c] / two_m - share * share;
  }
  return q;
}

/// Fraction of total edge weight that lies inside clusters.
inline double coverage(const WeightedGraph& g, const Partition& p) {
  detail::check_scorable(g, p);
  double intra = 0.0;
  for (const auto& e : g.edges()) {
    if (p.assignment[e.u] == p.assignment[e.v]) intra += e.w;
  }
  return intra / g.total_weight();
}

/// Pair-counting adjusted Rand index. When both partitions are trivial in the same way
/// (expected index equals the maximum), the index is defined as 1 if they agree and 0 otherwise.
inline double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::LengthMismatch,
         "partitions have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " nodes");
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::vector<double> row(a.num_clusters, 0.0), col(b.num_clusters, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a.assignment[i], b.assignment[i]}] += 1.0;
    row[a.assignment[i]] += 1.0;
    col[b.assignment[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [cell, count] : table) index += choose2(count);
  for (double r : row) sum_rows += choose2(r);
  for (double c : col) sum_cols += choose2(c);
  const double pairs = choose2(static_cast<double>(a.size()));
  if (pairs == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / pairs;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return index == maximum ? 1.0 : 0.0;
  return (index - expected) / (maximum - expected);
}

/// Exhaustive modularity maximization over all set partitions (restricted growth strings).
/// Ties go to fewer clusters, then to the lexicographically smaller assignment.
inline std::pair<Partition, double> brute_force_max_modularity(const WeightedGraph& g) {
  constexpr std::size_t kMaxNodes = 12;
  if (g.n() > kMaxNodes) {
    fail(ErrorCode::TooLarge, "brute force limited to " + std::to_string(kMaxNodes) + " nodes, got " +
                                  std::to_string(g.n()));
  }
  if (!(g.total_weight() > 0.0)) fail(ErrorCode::DegenerateGraph, "graph has no edge weight (m = 0)");

  const std::size_t n = g.n();
  std::vector<std::size_t> rgs(n, 0);  // restricted growth string
  std::vector<std::size_t> prefix_max(n, 0);
  Partition best;
  double best_q = -std::numeric_limits<double>::infinity();
  constexpr double kTieTolerance = 1e-12;

  auto advance = [&]() {
    for (std::size_t i = n; i-- > 1;) {
      if (rgs[i] <= prefix_max[i - 1]) {
        ++rgs[i];
        prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
          rgs[j] = 0;
          prefix_max[j] = prefix_max[i];
        }
        return true;
      }
    }
    return false;
  };

  do {
    Partition candidate{rgs, prefix_max[n - 1] + 1};
    const double q = modularity(g, candidate);
    const bool better = q > best_q + kTieTolerance;
    const bool tie = std::abs(q - best_q) <= kTieTolerance;
    if (better || (tie && (candidate.num_clusters < best.num_clusters ||
                           (candidate.num_clusters == best.num_clusters && candidate.assignment < best.assignment)))) {
      best = std::move(candidate);
      best_q = q;
    }
  } while (advance());
  return {std::move(best), best_q};
}

struct MetricsReport {
  std::string relation;
  std::size_t n = 0;
  std::string method;
  std::size_t num_clusters = 0;
  double modularity = 0.0;
  double coverage = 0.0;
};

inline constexpr std::string_view kMetricsHeader = "relation,n,method,num_clusters,modularity,coverage";

inline MetricsReport evaluate_partition(const WeightedGraph& g, const Partition& p, std::string relation,
                                        std::string method) {
  return {std::move(relation), g.n(), std::move(method), p.num_clusters, modularity(g, p), coverage(g, p)};
}

inline void write_metrics_row(std::ostream& out, const MetricsReport& r) {
  out << r.relation << ',' << r.n << ',' << r.method << ',' << r.num_clusters << ','
      << csv::format_double(r.modularity) << ',' << csv::format_double(r.coverage) << '\n';
}

}  // namespace siot
