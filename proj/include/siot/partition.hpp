#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "siot/csv.hpp"
#include "siot/error.hpp"

namespace siot {

/// Assignment of every node to a cluster label in 0..num_clusters-1, all labels used.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t num_clusters = 0;

  std::size_t size() const { return assignment.size(); }

  /// Relabels arbitrary integer labels densely, in order of first appearance.
  template <typename Label>
  static Partition from_labels(const std::vector<Label>& labels) {
    Partition p;
    p.assignment.reserve(labels.size());
    std::unordered_map<Label, std::size_t> dense;
    for (const auto& label : labels) {
      auto [it, inserted] = dense.try_emplace(label, dense.size());
      p.assignment.push_back(it->second);
    }
    p.num_clusters = dense.size();
    return p;
  }

  static Partition all_in_one(std::size_t n) {
    return {std::vector<std::size_t>(n, 0), n == 0 ? 0u : 1u};
  }

  static Partition singletons(std::size_t n) {
    Partition p{std::vector<std::size_t>(n), n};
    for (std::size_t i = 0; i < n; ++i) p.assignment[i] = i;
    return p;
  }

  /// Dense-label invariant.
  bool is_valid() const {
    std::vector<bool> used(num_clusters, false);
    for (auto c : assignment) {
      if (c >= num_clusters) return false;
      used[c] = true;
    }
    for (bool u : used) {
      if (!u) return false;
    }
    return true;
  }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(num_clusters, 0);
    for (auto c : assignment) ++sizes[c];
    return sizes;
  }
};

inline void write_partition_csv(std::ostream& out, const Partition& p) {
  out << "node_id,cluster_id\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << i << ',' << p.assignment[i] << '\n';
}

inline Partition read_partition_csv(std::istream& in, std::string_view source = "partition") {
  const auto rows = csv::read_table(in, "node_id,cluster_id", source);
  std::vector<long long> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [line, fields] = rows[i];
    const auto node = csv::parse_number<std::size_t>(fields[0]);
    const auto cluster = csv::parse_number<long long>(fields[1]);
    if (!node || !cluster || *node != i) {
      fail(ErrorCode::MalformedRow, csv::where(source, line) + ": expected node_id " + std::to_string(i) +
                                        " followed by an integer cluster_id");
    }
    labels[i] = *cluster;
  }
  return Partition::from_labels(labels);
}

}  // namespace siot
