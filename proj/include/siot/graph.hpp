#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/ingest.hpp"

namespace siot {

struct WeightedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double w = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Undirected weighted graph without self-loops. Edges are stored once with u < v,
/// sorted; adjacency lists hold both directions.
class WeightedGraph {
 public:
  struct Neighbor {
    std::size_t node;
    double w;
  };

  WeightedGraph() = default;

  /// Duplicate pairs (in either orientation) are summed.
  static WeightedGraph from_edge_list(std::size_t n, std::vector<WeightedEdge> edges) {
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        fail(ErrorCode::NodeOutOfRange, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                            ") outside 0.." + std::to_string(n == 0 ? 0 : n - 1));
      }
      if (e.u == e.v) fail(ErrorCode::SelfLoop, "self-loop on node " + std::to_string(e.u));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) {
        fail(ErrorCode::NonPositiveWeight, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                               ") has weight " + csv::format_double(e.w));
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    std::vector<WeightedEdge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
      if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
        merged.back().w += e.w;
      } else {
        merged.push_back(e);
      }
    }
    return WeightedGraph(n, std::move(merged));
  }

  std::size_t n() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const std::vector<double>& strengths() const { return strength_; }
  double strength(std::size_t v) const { return strength_[v]; }
  double total_weight() const { return total_weight_; }
  const std::vector<Neighbor>& neighbors(std::size_t v) const { return adjacency_[v]; }

  /// Same topology, every weight 1.
  WeightedGraph binarized() const {
    auto edges = edges_;
    for (auto& e : edges) e.w = 1.0;
    return WeightedGraph(n_, std::move(edges));
  }

 private:
  WeightedGraph(std::size_t n, std::vector<WeightedEdge> canonical)
      : n_(n), edges_(std::move(canonical)), strength_(n, 0.0), adjacency_(n) {
    for (const auto& e : edges_) {
      strength_[e.u] += e.w;
      strength_[e.v] += e.w;
      adjacency_[e.u].push_back({e.v, e.w});
      adjacency_[e.v].push_back({e.u, e.w});
      total_weight_ += e.w;
    }
  }

  std::size_t n_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<double> strength_;
  std::vector<std::vector<Neighbor>> adjacency_;
  double total_weight_ = 0.0;
};

inline constexpr double kEarthRadiusM = 6371000.0;

/// Great-circle distance in meters between two (lat, lon) points in degrees.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

/// Co-location: edge iff distance <= radius, weight exp(-(d/radius)^2).
inline WeightedGraph build_clor(const DeviceCatalog& catalog, double radius_m) {
  if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
    fail(ErrorCode::InvalidThreshold, "CLOR radius must be positive, got " + csv::format_double(radius_m));
  }
  std::vector<WeightedEdge> edges;
  const auto& r = catalog.records();
  for (std::size_t u = 0; u < r.size(); ++u) {
    for (std::size_t v = u + 1; v < r.size(); ++v) {
      const double d = haversine_m(r[u].latitude, r[u].longitude, r[v].latitude, r[v].longitude);
      if (d <= radius_m) {
        const double x = d / radius_m;
        edges.push_back({u, v, std::exp(-x * x)});
      }
    }
  }
  return WeightedGraph::from_edge_list(catalog.size(), std::move(edges));
}

/// Social-object relation from aggregated encounter time: edge iff total >= min_total_min,
/// weight min(1, total / saturation_min).
inline WeightedGraph build_sor(const DeviceCatalog& catalog, const EncounterLog& log, double min_total_min,
                               double saturation_min) {
  if (!(min_total_min >= 0.0)) fail(ErrorCode::InvalidThreshold, "SOR min_total_min must be >= 0");
  if (!(saturation_min > 0.0)) fail(ErrorCode::InvalidThreshold, "SOR saturation_min must be > 0");
  std::map<std::pair<std::size_t, std::size_t>, double> total;
  for (const auto& e : log.events) {
    if (e.u >= catalog.size() || e.v >= catalog.size()) {
      fail(ErrorCode::NodeOutOfRange, "encounter references device outside the catalog");
    }
    total[std::minmax(e.u, e.v)] += e.duration_min;
  }
  std::vector<WeightedEdge> edges;
  for (const auto& [pair, minutes] : total) {
    if (minutes >= min_total_min) edges.push_back({pair.first, pair.second, std::min(1.0, minutes / saturation_min)});
  }
  return WeightedGraph::from_edge_list(catalog.size(), std::move(edges));
}

inline constexpr double kSameOwnerWeight = 1.0;
inline constexpr double kFriendWeight = 0.5;
inline constexpr double kFriendOfFriendWeight = 0.25;

/// Friendship/ownership relation: same owner 1.0, owners are friends 0.5,
/// owners at friendship distance two 0.25. Friendships naming users with no device
/// in the catalog are skipped and counted in `ignored_friendships`.
inline WeightedGraph build_sfor(const DeviceCatalog& catalog, const FriendshipList& friends,
                                std::size_t& ignored_friendships) {
  std::map<std::int64_t, std::size_t> owner_index;
  for (const auto& d : catalog.records()) owner_index.try_emplace(d.user_id, owner_index.size());
  // map iteration gives sorted user ids, reindex so owner order is by user id
  std::size_t next = 0;
  for (auto& [user, idx] : owner_index) idx = next++;

  const std::size_t owners = owner_index.size();
  std::vector<std::vector<std::size_t>> devices_of(owners);
  for (const auto& d : catalog.records()) devices_of[owner_index.at(d.user_id)].push_back(d.device_id);

  std::vector<std::vector<std::size_t>> friend_adj(owners);
  ignored_friendships = 0;
  for (const auto& [a, b] : friends.edges) {
    auto ia = owner_index.find(a);
    auto ib = owner_index.find(b);
    if (ia == owner_index.end() || ib == owner_index.end()) {
      ++ignored_friendships;
      continue;
    }
    friend_adj[ia->second].push_back(ib->second);
    friend_adj[ib->second].push_back(ia->second);
  }

  std::vector<WeightedEdge> edges;
  auto connect = [&](std::size_t oa, std::size_t ob, double w) {
    for (auto u : devices_of[oa]) {
      for (auto v : devices_of[ob]) edges.push_back({u, v, w});
    }
  };
  for (std::size_t o = 0; o < owners; ++o) {
    const auto& own = devices_of[o];
    for (std::size_t i = 0; i < own.size(); ++i) {
      for (std::size_t j = i + 1; j < own.size(); ++j) edges.push_back({own[i], own[j], kSameOwnerWeight});
    }
  }
  std::vector<int> distance(owners, -1);
  std::vector<std::size_t> touched;
  for (std::size_t o = 0; o < owners; ++o) {
    distance[o] = 0;
    touched.assign(1, o);
    for (auto f : friend_adj[o]) {
      if (distance[f] < 0) {
        distance[f] = 1;
        touched.push_back(f);
      }
    }
    for (auto f : friend_adj[o]) {
      for (auto ff : friend_adj[f]) {
        if (distance[ff] < 0) {
          distance[ff] = 2;
          touched.push_back(ff);
        }
      }
    }
    for (auto t : touched) {
      if (t > o) connect(o, t, distance[t] == 1 ? kFriendWeight : kFriendOfFriendWeight);
    }
    for (auto t : touched) distance[t] = -1;
  }
  return WeightedGraph::from_edge_list(catalog.size(), std::move(edges));
}

inline WeightedGraph build_sfor(const DeviceCatalog& catalog, const FriendshipList& friends) {
  std::size_t ignored = 0;
  return build_sfor(catalog, friends, ignored);
}

inline constexpr std::string_view kEdgeListHeader = "u,v,w";

inline void write_edge_list_csv(std::ostream& out, const WeightedGraph& g) {
  out << kEdgeListHeader << '\n';
  for (const auto& e : g.edges()) out << e.u << ',' << e.v << ',' << csv::format_double(e.w) << '\n';
}

/// The node count is not part of the edge-list format and must be supplied.
inline WeightedGraph read_edge_list_csv(std::istream& in, std::size_t n, std::string_view source = "edges") {
  const auto rows = csv::read_table(in, kEdgeListHeader, source);
  std::vector<WeightedEdge> edges;
  edges.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    const auto u = csv::parse_number<std::size_t>(f[0]);
    const auto v = csv::parse_number<std::size_t>(f[1]);
    const auto w = csv::parse_number<double>(f[2]);
    if (!u || !v || !w) fail(ErrorCode::MalformedRow, csv::where(source, line) + ": expected u,v,w");
    edges.push_back({*u, *v, *w});
  }
  try {
    return WeightedGraph::from_edge_list(n, std::move(edges));
  } catch (const Error& e) {
    throw e.with_context(std::string(source));
  }
}

}  // namespace siot
