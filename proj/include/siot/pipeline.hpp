#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "siot/cluster.hpp"
#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/gnn.hpp"
#include "siot/graph.hpp"
#include "siot/ingest.hpp"
#include "siot/metrics.hpp"
#include "siot/partition.hpp"
#include "siot/random.hpp"
#include "siot/tsne.hpp"

namespace siot {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string> kAllRelations = {"clor", "sor", "sfor"};
inline const std::vector<std::string> kAllMethods = {"kmeans", "dbscan", "louvain"};

// ---------------------------------------------------------------------------
// Configuration

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "files"
  // synthetic
  std::size_t devices_per_owner = 4;
  std::size_t num_communities = 4;
  double p_in = 0.05;
  double p_out = 0.002;
  double geo_cluster_spread_m = 150.0;
  // files
  std::string devices;
  std::string friends;
  std::string encounters;
};

struct GraphConfig {
  double clor_radius_m = 100.0;
  double sor_min_total_min = 10.0;
  double sor_saturation_min = 60.0;
};

struct GnnConfig {
  std::size_t hidden1 = kDefaultHidden1;
  std::size_t hidden2 = kDefaultHidden2;
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  double dropout = 0.5;
  double label_fraction = 0.05;
  std::string label_source = "device_type";  // or "ground_truth" (synthetic data only)
};

struct KMeansConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  std::size_t restarts = 5;
  std::string input = "tsne2";  // or "embed32"
};

struct DbscanConfig {
  std::optional<double> eps;  // unset: median min_pts-th neighbor distance
  std::size_t min_pts = 4;
  std::string input = "embed32";  // or "tsne2"
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  DataConfig data;
  std::vector<std::size_t> scales = {1000, 1500, 2000};
  std::vector<std::string> relations = kAllRelations;
  std::vector<std::string> methods = kAllMethods;
  GraphConfig graph;
  GnnConfig gnn;
  TsneParams tsne;
  KMeansConfig kmeans;
  DbscanConfig dbscan;
  bool binarize = false;
};

namespace detail {

template <typename T>
void read_field(const Json& obj, std::string_view key, T& target, std::string_view section) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return;
  try {
    target = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string(section) + "." + std::string(key) + ": " + e.what());
  }
}

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> known, std::string_view section) {
  if (!obj.is_object()) fail(ErrorCode::ConfigError, std::string(section) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(ErrorCode::ConfigError, "unknown key '" + std::string(section) + "." + key + "'");
    }
  }
}

inline void check_subset(const std::vector<std::string>& values, const std::vector<std::string>& allowed,
                         std::string_view what) {
  if (values.empty()) fail(ErrorCode::ConfigError, std::string(what) + " must not be empty");
  for (const auto& v : values) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      fail(ErrorCode::ConfigError, "unknown " + std::string(what) + " '" + v + "'");
    }
  }
}

}  // namespace detail

inline void validate_config(const PipelineConfig& c) {
  detail::check_subset(c.relations, kAllRelations, "relation");
  detail::check_subset(c.methods, kAllMethods, "method");
  if (c.scales.empty()) fail(ErrorCode::ConfigError, "scales must not be empty");
  for (auto s : c.scales) {
    if (s < 4) fail(ErrorCode::ConfigError, "every scale must be at least 4");
  }
  if (c.data.source != "synthetic" && c.data.source != "files") {
    fail(ErrorCode::ConfigError, "data.source must be 'synthetic' or 'files'");
  }
  if (c.data.source == "files" && c.data.devices.empty()) {
    fail(ErrorCode::ConfigError, "data.devices is required when data.source is 'files'");
  }
  if (c.data.devices_per_owner < 1) fail(ErrorCode::ConfigError, "data.devices_per_owner must be >= 1");
  if (c.gnn.label_source != "device_type" && c.gnn.label_source != "ground_truth") {
    fail(ErrorCode::ConfigError, "gnn.label_source must be 'device_type' or 'ground_truth'");
  }
  if (c.gnn.label_source == "ground_truth" && c.data.source != "synthetic") {
    fail(ErrorCode::ConfigError, "gnn.label_source 'ground_truth' needs synthetic data");
  }
  for (const auto* input : {&c.kmeans.input, &c.dbscan.input}) {
    if (*input != "tsne2" && *input != "embed32") {
      fail(ErrorCode::ConfigError, "clustering input must be 'tsne2' or 'embed32', got '" + *input + "'");
    }
  }
}

inline PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  detail::reject_unknown(j, {"seed", "data", "scales", "relations", "methods", "graph", "gnn", "tsne", "kmeans", "dbscan", "binarize"}, "config");
  detail::read_field(j, "seed", c.seed, "config");
  detail::read_field(j, "scales", c.scales, "config");
  detail::read_field(j, "relations", c.relations, "config");
  detail::read_field(j, "methods", c.methods, "config");
  detail::read_field(j, "binarize", c.binarize, "config");
  if (auto it = j.find("data"); it != j.end()) {
    detail::reject_unknown(*it, {"source", "devices_per_owner", "num_communities", "p_in", "p_out", "geo_cluster_spread_m", "devices", "friends", "encounters"}, "data");
    detail::read_field(*it, "source", c.data.source, "data");
    detail::read_field(*it, "devices_per_owner", c.data.devices_per_owner, "data");
    detail::read_field(*it, "num_communities", c.data.num_communities, "data");
    detail::read_field(*it, "p_in", c.data.p_in, "data");
    detail::read_field(*it, "p_out", c.data.p_out, "data");
    detail::read_field(*it, "geo_cluster_spread_m", c.data.geo_cluster_spread_m, "data");
    detail::read_field(*it, "devices", c.data.devices, "data");
    detail::read_field(*it, "friends", c.data.friends, "data");
    detail::read_field(*it, "encounters", c.data.encounters, "data");
  }
  if (auto it = j.find("graph"); it != j.end()) {
    detail::reject_unknown(*it, {"clor_radius_m", "sor_min_total_min", "sor_saturation_min", "sfor_weights"}, "graph");
    // SFOR weights are fixed; a manifest echoes them back and they must match.
    if (auto w = it->find("sfor_weights"); w != it->end()) {
      const Json expected = {{"same_owner", kSameOwnerWeight}, {"friend", kFriendWeight}, {"friend_of_friend", kFriendOfFriendWeight}};
      if (*w != expected) fail(ErrorCode::ConfigError, "graph.sfor_weights cannot be changed");
    }
    detail::read_field(*it, "clor_radius_m", c.graph.clor_radius_m, "graph");
    detail::read_field(*it, "sor_min_total_min", c.graph.sor_min_total_min, "graph");
    detail::read_field(*it, "sor_saturation_min", c.graph.sor_saturation_min, "graph");
  }
  if (auto it = j.find("gnn"); it != j.end()) {
    detail::reject_unknown(*it, {"hidden1", "hidden2", "learning_rate", "epochs", "dropout", "label_fraction", "label_source"}, "gnn");
    detail::read_field(*it, "hidden1", c.gnn.hidden1, "gnn");
    detail::read_field(*it, "hidden2", c.gnn.hidden2, "gnn");
    detail::read_field(*it, "learning_rate", c.gnn.learning_rate, "gnn");
    detail::read_field(*it, "epochs", c.gnn.epochs, "gnn");
    detail::read_field(*it, "dropout", c.gnn.dropout, "gnn");
    detail::read_field(*it, "label_fraction", c.gnn.label_fraction, "gnn");
    detail::read_field(*it, "label_source", c.gnn.label_source, "gnn");
  }
  if (auto it = j.find("tsne"); it != j.end()) {
    detail::reject_unknown(*it, {"perplexity", "iterations", "exaggeration", "exaggeration_iterations", "learning_rate"}, "tsne");
    detail::read_field(*it, "perplexity", c.tsne.perplexity, "tsne");
    detail::read_field(*it, "iterations", c.tsne.iterations, "tsne");
    detail::read_field(*it, "exaggeration", c.tsne.exaggeration, "tsne");
    detail::read_field(*it, "exaggeration_iterations", c.tsne.exaggeration_iterations, "tsne");
    detail::read_field(*it, "learning_rate", c.tsne.learning_rate, "tsne");
  }
  if (auto it = j.find("kmeans"); it != j.end()) {
    detail::reject_unknown(*it, {"k_min", "k_max", "restarts", "input"}, "kmeans");
    detail::read_field(*it, "k_min", c.kmeans.k_min, "kmeans");
    detail::read_field(*it, "k_max", c.kmeans.k_max, "kmeans");
    detail::read_field(*it, "restarts", c.kmeans.restarts, "kmeans");
    detail::read_field(*it, "input", c.kmeans.input, "kmeans");
  }
  if (auto it = j.find("dbscan"); it != j.end()) {
    detail::reject_unknown(*it, {"eps", "min_pts", "input"}, "dbscan");
    if (auto e = it->find("eps"); e != it->end() && !e->is_null()) {
      double eps = 0.0;
      detail::read_field(*it, "eps", eps, "dbscan");
      c.dbscan.eps = eps;
    }
    detail::read_field(*it, "min_pts", c.dbscan.min_pts, "dbscan");
    detail::read_field(*it, "input", c.dbscan.input, "dbscan");
  }
  validate_config(c);
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  auto in = csv::open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

/// Every setting, defaults included, as it was used.
inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["data"] = {{"source", c.data.source},
               {"devices_per_owner", c.data.devices_per_owner},
               {"num_communities", c.data.num_communities},
               {"p_in", c.data.p_in},
               {"p_out", c.data.p_out},
               {"geo_cluster_spread_m", c.data.geo_cluster_spread_m},
               {"devices", c.data.devices},
               {"friends", c.data.friends},
               {"encounters", c.data.encounters}};
  j["scales"] = c.scales;
  j["relations"] = c.relations;
  j["methods"] = c.methods;
  j["graph"] = {{"clor_radius_m", c.graph.clor_radius_m},
                {"sor_min_total_min", c.graph.sor_min_total_min},
                {"sor_saturation_min", c.graph.sor_saturation_min},
                {"sfor_weights", {{"same_owner", kSameOwnerWeight}, {"friend", kFriendWeight}, {"friend_of_friend", kFriendOfFriendWeight}}}};
  j["gnn"] = {{"hidden1", c.gnn.hidden1},       {"hidden2", c.gnn.hidden2},
              {"learning_rate", c.gnn.learning_rate}, {"epochs", c.gnn.epochs},
              {"dropout", c.gnn.dropout},       {"label_fraction", c.gnn.label_fraction},
              {"label_source", c.gnn.label_source}};
  j["tsne"] = {{"perplexity", c.tsne.perplexity},
               {"iterations", c.tsne.iterations},
               {"exaggeration", c.tsne.exaggeration},
               {"exaggeration_iterations", c.tsne.exaggeration_iterations},
               {"learning_rate", c.tsne.learning_rate}};
  j["kmeans"] = {{"k_min", c.kmeans.k_min}, {"k_max", c.kmeans.k_max}, {"restarts", c.kmeans.restarts}, {"input", c.kmeans.input}};
  j["dbscan"] = {{"eps", c.dbscan.eps ? Json(*c.dbscan.eps) : Json(nullptr)}, {"min_pts", c.dbscan.min_pts}, {"input", c.dbscan.input}};
  j["binarize"] = c.binarize;
  return j;
}

// ---------------------------------------------------------------------------
// Stage cores. The CLI subcommands and run_pipeline both go through these.

struct Dataset {
  DeviceCatalog catalog;
  FriendshipList friends;
  EncounterLog encounters;
  std::optional<Partition> ground_truth;
};

/// Synthetic data generated at `scale`, or the catalog files subsampled to `scale`.
inline Dataset load_dataset(const PipelineConfig& c, std::size_t scale) {
  Dataset ds;
  if (c.data.source == "synthetic") {
    SyntheticConfig sc;
    sc.n = scale;
    sc.num_owners = std::max<std::size_t>(1, scale / c.data.devices_per_owner);
    sc.num_communities = c.data.num_communities;
    sc.p_in = c.data.p_in;
    sc.p_out = c.data.p_out;
    sc.geo_cluster_spread_m = c.data.geo_cluster_spread_m;
    sc.seed = derive_seed(c.seed, "data", scale);
    auto synthetic = generate_synthetic(sc);
    ds.catalog = std::move(synthetic.catalog);
    ds.friends = std::move(synthetic.friends);
    ds.encounters = std::move(synthetic.encounters);
    ds.ground_truth = std::move(synthetic.ground_truth);
    return ds;
  }
  auto devices_in = csv::open_input(c.data.devices);
  DeviceCatalog full = parse_devices(devices_in, c.data.devices);
  if (!c.data.friends.empty()) {
    auto in = csv::open_input(c.data.friends);
    ds.friends = parse_friendships(in, c.data.friends);
  }
  EncounterLog log;
  if (!c.data.encounters.empty()) {
    auto in = csv::open_input(c.data.encounters);
    log = parse_encounters(in, full, c.data.encounters);
  }
  std::tie(ds.catalog, ds.encounters) = subsample(full, log, scale, derive_seed(c.seed, "subsample", scale));
  return ds;
}

inline WeightedGraph build_relation(const Dataset& ds, const std::string& relation, const GraphConfig& gc) {
  if (relation == "clor") return build_clor(ds.catalog, gc.clor_radius_m);
  if (relation == "sor") return build_sor(ds.catalog, ds.encounters, gc.sor_min_total_min, gc.sor_saturation_min);
  if (relation == "sfor") return build_sfor(ds.catalog, ds.friends);
  fail(ErrorCode::ConfigError, "unknown relation '" + relation + "'");
}

struct EmbedOutcome {
  GnnModel model;
  Matrix embeddings;
  std::vector<double> loss_trace;
  std::size_t labeled = 0;
  std::size_t num_classes = 0;
};

/// Features, labels, training and embedding for one relation graph. Seeds derive from
/// (master seed, relation, node count).
inline EmbedOutcome embed_relation(const DeviceCatalog& catalog, const WeightedGraph& g, const GnnConfig& gc,
                                   const std::optional<Partition>& ground_truth, const std::string& relation,
                                   std::uint64_t master_seed) {
  const std::size_t n = catalog.size();
  const FeatureMatrix features = encode_features(catalog);
  const NormalizedAdjacency adj = normalize_adjacency(g);

  std::vector<std::size_t> classes;
  std::size_t num_classes = 0;
  if (gc.label_source == "ground_truth") {
    if (!ground_truth) fail(ErrorCode::ConfigError, "ground-truth labels requested but none available");
    classes = ground_truth->assignment;
    num_classes = ground_truth->num_clusters;
  } else {
    std::vector<std::string> types;
    types.reserve(n);
    for (const auto& d : catalog.records()) types.push_back(d.device_type);
    auto [ids, names] = classes_from_categories(types);
    classes = std::move(ids);
    num_classes = names.size();
  }
  if (num_classes < 2) fail(ErrorCode::DimensionMismatch, "label source has fewer than two classes");

  const std::string tag = "/" + relation;
  const LabelMask mask =
      stratified_label_mask(classes, num_classes, gc.label_fraction, derive_seed(master_seed, "labels" + tag, n));
  GnnModel model = init_model(features.d(), num_classes, derive_seed(master_seed, "gnn-init" + tag, n), gc.hidden1,
                              gc.hidden2, gc.dropout);
  TrainParams tp;
  tp.learning_rate = gc.learning_rate;
  tp.epochs = gc.epochs;
  tp.dropout = gc.dropout;
  tp.seed = derive_seed(master_seed, "gnn-train" + tag, n);
  auto trained = train(std::move(model), adj, features.values, mask, tp);

  EmbedOutcome out;
  out.embeddings = extract_embeddings(trained.model, adj, features.values);
  out.model = std::move(trained.model);
  out.loss_trace = std::move(trained.loss_trace);
  out.labeled = mask.labeled_count();
  out.num_classes = num_classes;
  return out;
}

inline Matrix reduce_embeddings(const Matrix& embeddings, TsneParams params, const std::string& relation,
                                std::uint64_t master_seed) {
  params.seed = derive_seed(master_seed, "tsne/" + relation, static_cast<std::uint64_t>(embeddings.rows()));
  return tsne(embeddings, params).embedding;
}

struct ClusterOutcome {
  Partition partition;
  Json metadata;
};

inline ClusterOutcome cluster_kmeans(const Matrix& points, const KMeansConfig& kc, const std::string& relation,
                                     std::uint64_t master_seed) {
  const std::uint64_t seed = derive_seed(master_seed, "kmeans/" + relation, static_cast<std::uint64_t>(points.rows()));
  const std::size_t k_max = std::min<std::size_t>(kc.k_max, static_cast<std::size_t>(points.rows()));
  auto elbow = select_k_elbow(points, kc.k_min, k_max, seed, kc.restarts);
  ClusterOutcome out{elbow.best.partition, Json::object()};
  out.metadata["method"] = "kmeans";
  out.metadata["input"] = kc.input;
  out.metadata["k_min"] = kc.k_min;
  out.metadata["k_max"] = k_max;
  out.metadata["restarts"] = kc.restarts;
  out.metadata["chosen_k"] = elbow.k;
  out.metadata["inertia_curve"] = elbow.inertia_curve;
  out.metadata["inertia"] = elbow.best.inertia;
  out.metadata["seed"] = seed;
  return out;
}

inline ClusterOutcome cluster_dbscan(const Matrix& points, const DbscanConfig& dc) {
  const bool defaulted = !dc.eps.has_value();
  KDistanceEps chosen{dc.eps.value_or(0.0), false};
  if (defaulted) chosen = median_k_distance(points, dc.min_pts);
  const double eps = chosen.eps;
  ClusterOutcome out{dbscan(points, eps, dc.min_pts), Json::object()};
  std::size_t noise = 0;
  for (auto size : out.partition.cluster_sizes()) noise += size == 1 ? 1 : 0;
  out.metadata["method"] = "dbscan";
  out.metadata["input"] = dc.input;
  out.metadata["eps"] = eps;
  out.metadata["eps_source"] = !defaulted        ? "configured"
                               : chosen.fallback ? "median_positive_k_distance"
                                                 : "median_k_distance";
  out.metadata["min_pts"] = dc.min_pts;
  out.metadata["singleton_clusters"] = noise;
  return out;
}

inline ClusterOutcome cluster_louvain(const WeightedGraph& g, const std::string& relation, std::uint64_t master_seed) {
  const std::uint64_t seed = derive_seed(master_seed, "louvain/" + relation, g.n());
  auto result = louvain(g, seed);
  ClusterOutcome out{result.partition, Json::object()};
  out.metadata["method"] = "louvain";
  out.metadata["seed"] = seed;
  out.metadata["modularity"] = result.modularity;
  out.metadata["level_modularity"] = result.level_modularity;
  return out;
}

inline MetricsReport score(const WeightedGraph& g, const Partition& p, const std::string& relation,
                           const std::string& method, bool binarize) {
  return binarize ? evaluate_partition(g.binarized(), p, relation, method) : evaluate_partition(g, p, relation, method);
}

// ---------------------------------------------------------------------------
// Whole grid

struct PipelineResult {
  std::vector<MetricsReport> metrics;
  Json manifest;
};

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  auto out = csv::open_output(path.string());
  out << content;
}

template <typename Writer>
std::string render(Writer&& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}
}  // namespace detail

/// Runs every (scale, relation, method) cell and writes the report bundle into `out_dir`.
inline PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  validate_config(config);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "partitions");
  fs::create_directories(out_dir / "embeddings");
  fs::create_directories(out_dir / "tsne");

  PipelineResult result;
  result.manifest["config"] = config_to_json(config);
  result.manifest["metrics_variant"] = config.binarize ? "binarized" : "weighted";
  Json cells = Json::array();
  std::map<std::pair<std::size_t, std::string>, std::size_t> counts;  // (scale, relation_method) -> K

  for (std::size_t scale : config.scales) {
    Dataset ds;
    try {
      ds = load_dataset(config, scale);
    } catch (const Error& e) {
      throw e.with_context("scale " + std::to_string(scale));
    }
    for (const auto& relation : config.relations) {
      const std::string context = "scale " + std::to_string(scale) + ", relation " + relation;
      const std::string stem = std::to_string(scale) + "_" + relation;
      std::optional<WeightedGraph> graph;
      std::optional<EmbedOutcome> embedded;
      std::optional<Matrix> reduced;
      Json relation_record;
      try {
        graph = build_relation(ds, relation, config.graph);
      } catch (const Error& e) {
        throw e.with_context(context);
      }
      relation_record["edges"] = graph->num_edges();
      relation_record["total_weight"] = graph->total_weight();

      auto ensure_embedding = [&]() -> const Matrix& {
        if (!embedded) {
          embedded = embed_relation(ds.catalog, *graph, config.gnn, ds.ground_truth, relation, config.seed);
          detail::write_file(out_dir / "embeddings" / (stem + ".csv"),
                             detail::render([&](std::ostream& o) { write_embeddings_csv(o, embedded->embeddings); }));
          relation_record["labeled_nodes"] = embedded->labeled;
          relation_record["label_classes"] = embedded->num_classes;
          relation_record["initial_loss"] = embedded->loss_trace.empty() ? 0.0 : embedded->loss_trace.front();
          relation_record["final_loss"] = embedded->loss_trace.empty() ? 0.0 : embedded->loss_trace.back();
        }
        return embedded->embeddings;
      };
      auto ensure_reduced = [&]() -> const Matrix& {
        if (!reduced) {
          reduced = reduce_embeddings(ensure_embedding(), config.tsne, relation, config.seed);
          detail::write_file(out_dir / "tsne" / (stem + ".csv"),
                             detail::render([&](std::ostream& o) { write_points_csv(o, *reduced, {"x", "y"}); }));
        }
        return *reduced;
      };
      auto points_for = [&](const std::string& input) -> const Matrix& {
        return input == "tsne2" ? ensure_reduced() : ensure_embedding();
      };

      for (const auto& method : config.methods) {
        ClusterOutcome outcome;
        MetricsReport report;
        try {
          if (method == "kmeans") {
            outcome = cluster_kmeans(points_for(config.kmeans.input), config.kmeans, relation, config.seed);
          } else if (method == "dbscan") {
            outcome = cluster_dbscan(points_for(config.dbscan.input), config.dbscan);
          } else {
            outcome = cluster_louvain(*graph, relation, config.seed);
          }
          report = score(*graph, outcome.partition, relation, method, config.binarize);
        } catch (const Error& e) {
          throw e.with_context(context + ", method " + method);
        }
        detail::write_file(out_dir / "partitions" / (stem + "_" + method + ".csv"),
                           detail::render([&](std::ostream& o) { write_partition_csv(o, outcome.partition); }));
        counts[{scale, relation + "_" + method}] = report.num_clusters;
        result.metrics.push_back(report);

        Json cell;
        cell["scale"] = scale;
        cell["n"] = ds.catalog.size();
        cell["relation"] = relation;
        cell["method"] = method;
        cell["num_clusters"] = report.num_clusters;
        cell["modularity"] = report.modularity;
        cell["coverage"] = report.coverage;
        cell["clustering"] = std::move(outcome.metadata);
        cells.push_back(std::move(cell));
      }
      Json rel;
      rel["scale"] = scale;
      rel["relation"] = relation;
      rel.update(relation_record);
      result.manifest["graphs"].push_back(std::move(rel));
    }
  }
  result.manifest["cells"] = std::move(cells);

  detail::write_file(out_dir / "metrics.csv", detail::render([&](std::ostream& o) {
                       o << kMetricsHeader << '\n';
                       for (const auto& r : result.metrics) write_metrics_row(o, r);
                     }));
  // Table layout: one row per scale, one column per relation x method.
  detail::write_file(out_dir / "cluster_counts.csv", detail::render([&](std::ostream& o) {
                       o << "scale";
                       for (const auto& r : config.relations) {
                         for (const auto& m : config.methods) o << ',' << r << '_' << m;
                       }
                       o << '\n';
                       for (auto scale : config.scales) {
                         o << scale;
                         for (const auto& r : config.relations) {
                           for (const auto& m : config.methods) o << ',' << counts.at({scale, r + "_" + m});
                         }
                         o << '\n';
                       }
                     }));
  detail::write_file(out_dir / "manifest.json", result.manifest.dump(2) + "\n");
  return result;
}

}  // namespace siot
