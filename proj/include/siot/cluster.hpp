#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "siot/error.hpp"
#include "siot/graph.hpp"
#include "siot/ingest.hpp"
#include "siot/metrics.hpp"
#include "siot/partition.hpp"
#include "siot/random.hpp"

namespace siot {

// ---------------------------------------------------------------------------
// K-means

struct KMeansParams {
  std::size_t max_iterations = 300;
  double tolerance = 1e-9;
};

struct KMeansResult {
  Partition partition;
  double inertia = 0.0;
  Matrix centroids;                   // K x p
  std::vector<double> inertia_trace;  // after every Lloyd iteration
  std::size_t iterations = 0;
};

namespace detail {

inline std::vector<std::size_t> nearest_centroids(const Matrix& points, const Matrix& centroids,
                                                  std::vector<double>& best_distance) {
  const auto n = points.rows();
  std::vector<std::size_t> assignment(static_cast<std::size_t>(n));
  best_distance.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<std::size_t>(c);
      }
    }
    assignment[static_cast<std::size_t>(i)] = arg;
    best_distance[static_cast<std::size_t>(i)] = best;
  }
  return assignment;
}

inline Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Matrix centroids(static_cast<Eigen::Index>(k), points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(0)).squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        running += d2[i];
        if (running > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    } else {
      pick = rng.below(n);
    }
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centroids;
}

/// Empty clusters take the point farthest from its centroid, from a cluster that has more than one point.
inline void repair_empty_clusters(std::vector<std::size_t>& assignment, std::vector<double>& distance,
                                  std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (auto c : assignment) ++sizes[c];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    std::size_t victim = assignment.size();
    double farthest = -1.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (sizes[assignment[i]] > 1 && distance[i] > farthest) {
        farthest = distance[i];
        victim = i;
      }
    }
    --sizes[assignment[victim]];
    assignment[victim] = c;
    distance[victim] = 0.0;
    sizes[c] = 1;
  }
}

inline Matrix cluster_means(const Matrix& points, const std::vector<std::size_t>& assignment, std::size_t k) {
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), points.cols());
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    sums.row(static_cast<Eigen::Index>(assignment[i])) += points.row(static_cast<Eigen::Index>(i));
    counts[assignment[i]] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) sums.row(static_cast<Eigen::Index>(c)) /= counts[c];
  return sums;
}

inline double inertia_of(const Matrix& points, const std::vector<std::size_t>& assignment, const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    total += (points.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(assignment[i]))).squaredNorm();
  }
  return total;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds. Stops when no centroid moves by `tolerance`
/// or more, or after `max_iterations`. Partition labels are renumbered by first appearance.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansParams& params = {}) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1 || k > n) fail(ErrorCode::InvalidK, "need 1 <= K <= n (K " + std::to_string(k) + ", n " + std::to_string(n) + ")");
  Rng rng(seed);
  Matrix centroids = detail::kmeans_plus_plus(points, k, rng);
  KMeansResult result;
  std::vector<std::size_t> assignment;
  std::vector<double> distance;

  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    assignment = detail::nearest_centroids(points, centroids, distance);
    detail::repair_empty_clusters(assignment, distance, k);
    Matrix updated = detail::cluster_means(points, assignment, k);
    const double shift = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(updated);
    result.inertia_trace.push_back(detail::inertia_of(points, assignment, centroids));
    result.iterations = iter + 1;
    if (shift < params.tolerance) break;
  }
  result.inertia = detail::inertia_of(points, assignment, centroids);
  result.partition = Partition::from_labels(assignment);
  // Reorder centroids to match the renumbered labels.
  Matrix ordered(centroids.rows(), centroids.cols());
  for (std::size_t i = 0; i < n; ++i) {
    ordered.row(static_cast<Eigen::Index>(result.partition.assignment[i])) = centroids.row(static_cast<Eigen::Index>(assignment[i]));
  }
  result.centroids = std::move(ordered);
  return result;
}

/// Lowest inertia over `restarts` seeded runs.
inline KMeansResult kmeans_best_of(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                                   const KMeansParams& params = {}) {
  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    auto run = kmeans(points, k, derive_seed(seed, "kmeans-restart", r), params);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

/// Interior K maximizing inertia(K-1) - 2 inertia(K) + inertia(K+1); first maximum wins.
inline std::size_t elbow_from_curve(std::size_t k_min, std::span<const double> inertia) {
  if (inertia.size() < 3) fail(ErrorCode::InvalidRange, "elbow needs at least three K values");
  std::size_t best = 1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < inertia.size(); ++i) {
    const double second = inertia[i - 1] - 2.0 * inertia[i] + inertia[i + 1];
    if (second > best_value) {
      best_value = second;
      best = i;
    }
  }
  return k_min + best;
}

struct ElbowResult {
  std::size_t k = 0;
  std::vector<double> inertia_curve;  // inertia for K = k_min..k_max
  KMeansResult best;                  // best run at the chosen K
};

inline ElbowResult select_k_elbow(const Matrix& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                                  std::size_t restarts = 5, const KMeansParams& params = {}) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k_min < 1 || k_max < k_min + 2 || k_max > n) {
    fail(ErrorCode::InvalidRange, "need 1 <= k_min, k_min + 2 <= k_max <= n (got " + std::to_string(k_min) + ".." +
                                      std::to_string(k_max) + ", n " + std::to_string(n) + ")");
  }
  ElbowResult result;
  std::vector<KMeansResult> runs;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    runs.push_back(kmeans_best_of(points, k, derive_seed(seed, "elbow-k", k), restarts, params));
    result.inertia_curve.push_back(runs.back().inertia);
  }
  result.k = elbow_from_curve(k_min, result.inertia_curve);
  result.best = std::move(runs[result.k - k_min]);
  return result;
}

// ---------------------------------------------------------------------------
// DBSCAN

/// Density clustering. A point is core when at least `min_pts` points (itself included)
/// lie within `eps`. Clusters grow from cores in ascending index order, so a border point
/// belongs to the earliest cluster that reaches it. Every noise point is its own cluster.
inline Partition dbscan(const Matrix& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps) || min_pts < 1) {
    fail(ErrorCode::InvalidParams, "DBSCAN needs eps > 0 and min_pts >= 1");
  }
  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).squaredNorm() <= eps2) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  for (auto& list : neighbors) std::sort(list.begin(), list.end());

  constexpr auto kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(n, kUnassigned);
  std::size_t next_label = 0;
  std::deque<std::size_t> frontier;
  auto is_core = [&](std::size_t i) { return neighbors[i].size() >= min_pts; };
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || !is_core(seed)) continue;
    const std::size_t cluster = next_label++;
    label[seed] = cluster;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (auto q : neighbors[p]) {
        if (label[q] != kUnassigned) continue;
        label[q] = cluster;
        if (is_core(q)) frontier.push_back(q);
      }
    }
  }
  for (auto& l : label) {
    if (l == kUnassigned) l = next_label++;
  }
  return Partition::from_labels(label);
}

struct KDistanceEps {
  double eps = 0.0;
  bool fallback = false;  // true when the plain median was zero
};

/// Median distance to the k-th nearest other point: the default DBSCAN radius.
/// Duplicate-heavy inputs can make that median zero; the median over the positive
/// k-distances is used instead, and 1.0 when every point coincides.
inline KDistanceEps median_k_distance(const Matrix& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2 || k < 1) fail(ErrorCode::InvalidParams, "k-distance needs at least two points and k >= 1");
  std::vector<double> kth(n);
  std::vector<double> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back((points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm());
    }
    const std::size_t rank = std::min(k, dist.size()) - 1;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank), dist.end());
    kth[i] = dist[rank];
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  };
  const double plain = median(kth);
  if (plain > 0.0) return {plain, false};
  std::vector<double> positive;
  for (double d : kth) {
    if (d > 0.0) positive.push_back(d);
  }
  return {positive.empty() ? 1.0 : median(std::move(positive)), true};
}

// ---------------------------------------------------------------------------
// Louvain

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  std::vector<double> level_modularity;  // modularity on the input graph after each level
};

namespace detail {

/// Graph at one aggregation level. `loop` holds each node's internal weight (undirected, counted once).
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
  std::vector<double> loop;
  std::vector<double> degree;

  std::size_t size() const { return adjacency.size(); }
};

inline LevelGraph level_graph_from(const WeightedGraph& g) {
  LevelGraph lg;
  lg.adjacency.resize(g.n());
  lg.loop.assign(g.n(), 0.0);
  lg.degree = g.strengths();
  for (std::size_t v = 0; v < g.n(); ++v) {
    for (const auto& nb : g.neighbors(v)) lg.adjacency[v].emplace_back(nb.node, nb.w);
  }
  return lg;
}

/// Local moving on one level. Returns true if any node changed community.
inline bool louvain_local_moves(const LevelGraph& lg, double m, std::vector<std::size_t>& community, Rng& rng,
                                double min_gain) {
  const std::size_t n = lg.size();
  community.resize(n);
  std::iota(community.begin(), community.end(), 0);
  std::vector<double> total(lg.degree);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<double> link(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (auto v : order) {
      const std::size_t home = community[v];
      const double k = lg.degree[v];
      touched.clear();
      for (const auto& [u, w] : lg.adjacency[v]) {
        const std::size_t c = community[u];
        if (!seen[c]) {
          seen[c] = true;
          touched.push_back(c);
        }
        link[c] += w;
      }
      total[home] -= k;
      // Gain of joining c (up to a constant 1/m factor): link_c - total_c * k / 2m.
      auto gain = [&](std::size_t c) { return link[c] - total[c] * k / (2.0 * m); };
      std::size_t best = home;
      double best_gain = gain(home);
      for (auto c : touched) {
        const double value = gain(c);
        if ((value - best_gain) / m > min_gain) {
          best = c;
          best_gain = value;
        }
      }
      total[best] += k;
      community[v] = best;
      if (best != home) moved = any_move = true;
      for (auto c : touched) {
        link[c] = 0.0;
        seen[c] = false;
      }
    }
  }
  return any_move;
}

inline LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& community, std::size_t groups) {
  LevelGraph next;
  next.adjacency.resize(groups);
  next.loop.assign(groups, 0.0);
  next.degree.assign(groups, 0.0);
  std::vector<std::unordered_map<std::size_t, double>> weights(groups);
  for (std::size_t v = 0; v < lg.size(); ++v) {
    const std::size_t cv = community[v];
    next.loop[cv] += lg.loop[v];
    next.degree[cv] += lg.degree[v];
    for (const auto& [u, w] : lg.adjacency[v]) {
      const std::size_t cu = community[u];
      if (cu == cv) {
        if (u > v) next.loop[cv] += w;
      } else {
        weights[cv][cu] += w;
      }
    }
  }
  for (std::size_t c = 0; c < groups; ++c) {
    next.adjacency[c].assign(weights[c].begin(), weights[c].end());
    std::sort(next.adjacency[c].begin(), next.adjacency[c].end());
  }
  return next;
}

/// Single-node moves on the input graph, a fresh cluster included as a target, in
/// ascending node order until no move gains more than `min_gain`. Returns true if any node moved.
inline bool refine_partition(const WeightedGraph& g, std::vector<std::size_t>& assignment, double min_gain) {
  const std::size_t n = g.n();
  const double m = g.total_weight();
  std::size_t labels = n == 0 ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> total(labels + n, 0.0);
  std::vector<std::size_t> members(labels + n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    total[assignment[v]] += g.strength(v);
    ++members[assignment[v]];
  }
  std::vector<double> link(total.size(), 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false, moved = true;
  while (moved) {
    moved = false;
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t home = assignment[v];
      const double k = g.strength(v);
      touched.clear();
      for (const auto& nb : g.neighbors(v)) {
        const std::size_t c = assignment[nb.node];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += nb.w;
      }
      total[home] -= k;
      auto gain = [&](std::size_t c) { return link[c] - total[c] * k / (2.0 * m); };
      std::size_t best = home;
      double best_gain = gain(home);
      for (auto c : touched) {
        if ((gain(c) - best_gain) / m > min_gain) {
          best = c;
          best_gain = gain(c);
        }
      }
      // An empty cluster has zero gain; only worth it when v is not already alone.
      if (members[home] > 1 && -best_gain / m > min_gain) {
        while (members[labels] != 0) ++labels;
        best = labels;
        best_gain = 0.0;
      }
      total[best] += k;
      if (best != home) {
        --members[home];
        ++members[best];
        assignment[v] = best;
        moved = any_move = true;
      }
      for (auto c : touched) link[c] = 0.0;
    }
  }
  if (any_move) assignment = Partition::from_labels(assignment).assignment;
  return any_move;
}

/// Kernighan-Lin style pass on the input graph: every node is moved once, each time
/// taking the best single move among the unmoved nodes even if it loses modularity,
/// and the sequence is then cut back to its best prefix. Returns true if that prefix gains.
inline bool kl_pass(const WeightedGraph& g, std::vector<std::size_t>& assignment, double min_gain) {
  const std::size_t n = g.n();
  const double m = g.total_weight();
  const std::size_t labels = n == 0 ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> total(labels + n, 0.0);
  std::vector<std::size_t> members(labels + n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    total[assignment[v]] += g.strength(v);
    ++members[assignment[v]];
  }
  std::vector<double> link(total.size(), 0.0);
  std::vector<std::size_t> touched;
  std::vector<bool> locked(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> history;  // (node, previous cluster)
  double cumulative = 0.0, best_cumulative = 0.0;
  std::size_t best_length = 0;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best_node = n, best_target = 0;
    double best_delta = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (locked[v]) continue;
      const std::size_t home = assignment[v];
      const double k = g.strength(v);
      touched.clear();
      for (const auto& nb : g.neighbors(v)) {
        const std::size_t c = assignment[nb.node];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += nb.w;
      }
      const double stay = link[home] - (total[home] - k) * k / (2.0 * m);
      auto consider = [&](std::size_t c, double value) {
        const double delta = (value - stay) / m;
        if (delta > best_delta) {
          best_delta = delta;
          best_node = v;
          best_target = c;
        }
      };
      for (auto c : touched) {
        if (c != home) consider(c, link[c] - total[c] * k / (2.0 * m));
      }
      if (members[home] > 1) consider(total.size(), 0.0);  // a fresh cluster
      for (auto c : touched) link[c] = 0.0;
    }
    if (best_node == n) break;
    std::size_t target = best_target;
    if (target == total.size()) {
      target = 0;
      while (members[target] != 0) ++target;
    }
    const std::size_t home = assignment[best_node];
    total[home] -= g.strength(best_node);
    --members[home];
    total[target] += g.strength(best_node);
    ++members[target];
    assignment[best_node] = target;
    locked[best_node] = true;
    history.emplace_back(best_node, home);
    cumulative += best_delta;
    if (cumulative - best_cumulative > min_gain) {
      best_cumulative = cumulative;
      best_length = history.size();
    }
  }
  for (std::size_t i = history.size(); i > best_length; --i) assignment[history[i - 1].first] = history[i - 1].second;
  if (best_length == 0) return false;
  assignment = Partition::from_labels(assignment).assignment;
  return true;
}

/// One Louvain run from `start`: levels of local moving and aggregation, each finished
/// by a greedy refinement on the input graph, until nothing gains.
inline LouvainResult louvain_run(const WeightedGraph& g, Rng& rng, double min_gain,
                                 const std::vector<std::size_t>& start) {
  const double m = g.total_weight();
  LouvainResult result;
  const LevelGraph base = level_graph_from(g);
  Partition initial = Partition::from_labels(start);
  std::vector<std::size_t> node_community = initial.assignment;
  LevelGraph level = aggregate(base, initial.assignment, initial.num_clusters);
  double current_q = modularity(g, initial);

  while (true) {
    bool progressed = false;
    std::vector<std::size_t> community;
    if (level.size() > 1 && louvain_local_moves(level, m, community, rng, min_gain)) {
      const Partition dense = Partition::from_labels(community);
      std::vector<std::size_t> candidate(g.n());
      for (std::size_t v = 0; v < g.n(); ++v) candidate[v] = dense.assignment[node_community[v]];
      const double q = modularity(g, Partition::from_labels(candidate));
      if (q - current_q > min_gain) {
        node_community = std::move(candidate);
        current_q = q;
        result.level_modularity.push_back(q);
        level = aggregate(level, dense.assignment, dense.num_clusters);
        progressed = true;
      }
    }
    if (!progressed) {
      std::vector<std::size_t> refined = node_community;
      if (!refine_partition(g, refined, min_gain)) break;
      const Partition dense = Partition::from_labels(refined);
      const double q = modularity(g, dense);
      if (!(q - current_q > min_gain)) break;
      node_community = dense.assignment;
      current_q = q;
      result.level_modularity.push_back(q);
      level = aggregate(base, dense.assignment, dense.num_clusters);
    }
  }
  result.partition = Partition::from_labels(node_community);
  result.modularity = modularity(g, result.partition);
  return result;
}

}  // namespace detail

inline constexpr std::size_t kLouvainRestarts = 8;

/// Weighted Louvain: local moving then aggregation, repeated until a level brings no
/// modularity gain above `min_gain`, with a single-node refinement on the input graph
/// between levels. Node visit order is shuffled once per level. `restarts` runs with
/// seeds derived from `seed` are made and the best kept (first on ties); Kernighan-Lin
/// passes then polish it, resuming the level loop after every pass that gains.
inline LouvainResult louvain(const WeightedGraph& g, std::uint64_t seed, double min_gain = 1e-12,
                             std::size_t restarts = kLouvainRestarts) {
  if (!(g.total_weight() > 0.0)) fail(ErrorCode::DegenerateGraph, "Louvain needs at least one edge (m = 0)");
  std::vector<std::size_t> singletons(g.n());
  std::iota(singletons.begin(), singletons.end(), 0);
  LouvainResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    Rng rng(r == 0 ? seed : derive_seed(seed, "louvain-restart", r));
    LouvainResult run = detail::louvain_run(g, rng, min_gain, singletons);
    if (r == 0 || run.modularity - best.modularity > min_gain) best = std::move(run);
  }
  for (std::uint64_t round = 0;; ++round) {
    std::vector<std::size_t> polished = best.partition.assignment;
    if (!detail::kl_pass(g, polished, min_gain)) break;
    const double q = modularity(g, Partition::from_labels(polished));
    if (!(q - best.modularity > min_gain)) break;
    best.level_modularity.push_back(q);
    Rng rng(derive_seed(seed, "louvain-polish", round));
    LouvainResult resumed = detail::louvain_run(g, rng, min_gain, polished);
    best.partition = std::move(resumed.partition);
    best.modularity = resumed.modularity;
    best.level_modularity.insert(best.level_modularity.end(), resumed.level_modularity.begin(),
                                 resumed.level_modularity.end());
  }
  return best;
}

}  // namespace siot
