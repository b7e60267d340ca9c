#pragma once

// File-to-file pipeline stages behind the CLI subcommands. Each stage reads the
// previous stage's files and calls the same cores as run_pipeline, so chaining
// ingest -> build-graph -> embed -> cluster -> evaluate reproduces its metrics.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "siot/pipeline.hpp"

namespace siot::stages {

namespace fs = std::filesystem;

inline constexpr const char* kDevicesFile = "devices.csv";
inline constexpr const char* kFriendsFile = "friends.csv";
inline constexpr const char* kEncountersFile = "encounters.csv";
inline constexpr const char* kGroundTruthFile = "ground_truth.csv";
inline constexpr const char* kFeaturesFile = "features.csv";

/// Writes devices, friendships, encounters, encoded features and (synthetic only) ground truth.
inline void ingest(const PipelineConfig& config, std::size_t scale, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Dataset ds = load_dataset(config, scale);
  detail::write_file(out_dir / kDevicesFile, detail::render([&](std::ostream& o) { write_devices_csv(o, ds.catalog); }));
  detail::write_file(out_dir / kFriendsFile, detail::render([&](std::ostream& o) { write_friendships_csv(o, ds.friends); }));
  detail::write_file(out_dir / kEncountersFile,
                     detail::render([&](std::ostream& o) { write_encounters_csv(o, ds.encounters, ds.catalog); }));
  if (ds.ground_truth) {
    detail::write_file(out_dir / kGroundTruthFile,
                       detail::render([&](std::ostream& o) { write_partition_csv(o, *ds.ground_truth); }));
  }
  const FeatureMatrix features = encode_features(ds.catalog);
  std::vector<std::string> names;
  for (const auto& c : features.column_schema) names.push_back(c.attribute + "=" + c.category);
  detail::write_file(out_dir / kFeaturesFile,
                     detail::render([&](std::ostream& o) { write_points_csv(o, features.values, names); }));
}

/// Reads a dataset from explicit files; missing friendship/encounter paths mean empty lists.
inline Dataset read_dataset(const std::string& devices, const std::string& friends, const std::string& encounters,
                            const std::string& ground_truth = {}) {
  Dataset ds;
  {
    auto in = csv::open_input(devices);
    ds.catalog = parse_devices(in, devices);
  }
  if (!friends.empty() && fs::exists(friends)) {
    auto in = csv::open_input(friends);
    ds.friends = parse_friendships(in, friends);
  }
  if (!encounters.empty() && fs::exists(encounters)) {
    auto in = csv::open_input(encounters);
    ds.encounters = parse_encounters(in, ds.catalog, encounters);
  }
  if (!ground_truth.empty() && fs::exists(ground_truth)) {
    auto in = csv::open_input(ground_truth);
    ds.ground_truth = read_partition_csv(in, ground_truth);
    if (ds.ground_truth->size() != ds.catalog.size()) {
      fail(ErrorCode::LengthMismatch, ground_truth + ": ground truth has " + std::to_string(ds.ground_truth->size()) +
                                          " nodes, catalog has " + std::to_string(ds.catalog.size()));
    }
  }
  return ds;
}

inline Dataset read_dataset_dir(const fs::path& dir) {
  return read_dataset((dir / kDevicesFile).string(), (dir / kFriendsFile).string(), (dir / kEncountersFile).string(),
                      (dir / kGroundTruthFile).string());
}

inline WeightedGraph build_graph(const Dataset& ds, const std::string& relation, const GraphConfig& gc,
                                 const fs::path& out_file) {
  const WeightedGraph g = build_relation(ds, relation, gc);
  detail::write_file(out_file, detail::render([&](std::ostream& o) { write_edge_list_csv(o, g); }));
  return g;
}

inline WeightedGraph read_graph(const std::string& path, std::size_t n) {
  auto in = csv::open_input(path);
  return read_edge_list_csv(in, n, path);
}

/// Trains on one relation graph; writes checkpoint.txt and embeddings.csv, plus tsne.csv when asked.
inline EmbedOutcome embed(const Dataset& ds, const WeightedGraph& g, const PipelineConfig& config,
                          const std::string& relation, const fs::path& out_dir, bool with_tsne) {
  fs::create_directories(out_dir);
  EmbedOutcome out = embed_relation(ds.catalog, g, config.gnn, ds.ground_truth, relation, config.seed);
  detail::write_file(out_dir / "checkpoint.txt", detail::render([&](std::ostream& o) { save_checkpoint(o, out.model); }));
  detail::write_file(out_dir / "embeddings.csv",
                     detail::render([&](std::ostream& o) { write_embeddings_csv(o, out.embeddings); }));
  if (with_tsne) {
    const Matrix reduced = reduce_embeddings(out.embeddings, config.tsne, relation, config.seed);
    detail::write_file(out_dir / "tsne.csv", detail::render([&](std::ostream& o) { write_points_csv(o, reduced, {"x", "y"}); }));
  }
  return out;
}

inline Matrix read_points(const std::string& path) {
  auto in = csv::open_input(path);
  return read_points_csv(in, path);
}

/// Clusters points (kmeans/dbscan) or a graph (louvain); writes the partition and a JSON sidecar.
inline ClusterOutcome cluster(const std::string& method, const PipelineConfig& config, const std::string& relation,
                              const std::optional<Matrix>& points, const std::optional<WeightedGraph>& graph,
                              const fs::path& partition_file, const fs::path& metadata_file) {
  ClusterOutcome outcome;
  if (method == "kmeans" || method == "dbscan") {
    if (!points) fail(ErrorCode::ConfigError, method + " needs a point file");
    outcome = method == "kmeans" ? cluster_kmeans(*points, config.kmeans, relation, config.seed)
                                 : cluster_dbscan(*points, config.dbscan);
  } else if (method == "louvain") {
    if (!graph) fail(ErrorCode::ConfigError, "louvain needs a graph file");
    outcome = cluster_louvain(*graph, relation, config.seed);
  } else {
    fail(ErrorCode::ConfigError, "unknown method '" + method + "'");
  }
  detail::write_file(partition_file, detail::render([&](std::ostream& o) { write_partition_csv(o, outcome.partition); }));
  if (!metadata_file.empty()) detail::write_file(metadata_file, outcome.metadata.dump(2) + "\n");
  return outcome;
}

inline Partition read_partition(const std::string& path) {
  auto in = csv::open_input(path);
  return read_partition_csv(in, path);
}

}  // namespace siot::stages
