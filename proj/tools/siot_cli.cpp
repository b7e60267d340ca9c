// siot: command-line front end for the SIoT clustering pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "siot/siot.hpp"

namespace {

using siot::ErrorCode;
using siot::PipelineConfig;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file (defaults apply otherwise)");
  cmd->add_option("--seed", c.seed, "Master seed, overrides the configuration");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig config = c.config_path.empty() ? PipelineConfig{} : siot::load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  return config;
}

struct DatasetArgs {
  std::string dir;
  std::string devices;
  std::string friends;
  std::string encounters;
};

void add_dataset(CLI::App* cmd, DatasetArgs& d) {
  cmd->add_option("--dataset", d.dir, "Directory written by 'ingest'");
  cmd->add_option("--devices", d.devices, "Device catalog CSV");
  cmd->add_option("--friends", d.friends, "Owner friendship CSV");
  cmd->add_option("--encounters", d.encounters, "Encounter log CSV");
}

siot::Dataset read_dataset(const DatasetArgs& d) {
  if (!d.dir.empty()) return siot::stages::read_dataset_dir(d.dir);
  if (d.devices.empty()) siot::fail(ErrorCode::ConfigError, "either --dataset or --devices is required");
  return siot::stages::read_dataset(d.devices, d.friends, d.encounters);
}

void check_relation(const std::string& relation) {
  siot::detail::check_subset({relation}, siot::kAllRelations, "relation");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : siot::csv::split(s)) {
    auto t = siot::csv::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation graphs, GNN embeddings and clustering for SIoT device catalogs"};
  app.require_subcommand(1);

  // run
  Common run_common;
  std::string run_out;
  std::string run_scales, run_relations, run_methods, run_dbscan_input, run_kmeans_input;
  bool run_binarize = false;
  auto* run = app.add_subcommand("run", "Run the full scale x relation x method grid");
  add_common(run, run_common);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--scales", run_scales, "Comma-separated device counts");
  run->add_option("--relations", run_relations, "Comma-separated subset of clor,sor,sfor");
  run->add_option("--methods", run_methods, "Comma-separated subset of kmeans,dbscan,louvain");
  run->add_option("--dbscan-input", run_dbscan_input, "embed32 or tsne2");
  run->add_option("--kmeans-input", run_kmeans_input, "embed32 or tsne2");
  run->add_flag("--binarize", run_binarize, "Score modularity and coverage on unit weights");

  // ingest
  Common ingest_common;
  DatasetArgs ingest_files;
  std::size_t ingest_scale = 0;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Load or generate a catalog and write the dataset files");
  add_common(ingest, ingest_common);
  ingest->add_option("--devices", ingest_files.devices, "Device catalog CSV (synthetic data otherwise)");
  ingest->add_option("--friends", ingest_files.friends, "Owner friendship CSV");
  ingest->add_option("--encounters", ingest_files.encounters, "Encounter log CSV");
  ingest->add_option("--scale", ingest_scale, "Number of devices")->required();
  ingest->add_option("--out", ingest_out, "Output directory")->required();

  // build-graph
  Common graph_common;
  DatasetArgs graph_data;
  std::string graph_relation, graph_out;
  std::optional<double> radius_m, sor_min, sor_saturation;
  auto* build = app.add_subcommand("build-graph", "Build one relation graph as an edge list");
  add_common(build, graph_common);
  add_dataset(build, graph_data);
  build->add_option("--relation", graph_relation, "clor, sor or sfor")->required();
  build->add_option("--radius-m", radius_m, "Co-location radius in meters");
  build->add_option("--sor-min", sor_min, "Minimum total encounter minutes");
  build->add_option("--sor-saturation", sor_saturation, "Minutes at which the weight reaches 1");
  build->add_option("--out", graph_out, "Edge list CSV (stdout if omitted)");

  // embed
  Common embed_common;
  DatasetArgs embed_data;
  std::string embed_relation, embed_graph, embed_out, embed_label_source;
  bool embed_tsne = false;
  auto* embed = app.add_subcommand("embed", "Train the GNN on one relation graph and write embeddings");
  add_common(embed, embed_common);
  add_dataset(embed, embed_data);
  embed->add_option("--relation", embed_relation, "clor, sor or sfor")->required();
  embed->add_option("--graph", embed_graph, "Edge list CSV")->required();
  embed->add_option("--out", embed_out, "Output directory")->required();
  embed->add_option("--label-source", embed_label_source, "device_type or ground_truth");
  embed->add_flag("--tsne", embed_tsne, "Also write the 2-d t-SNE projection");

  // cluster
  Common cluster_common;
  std::string cluster_method, cluster_relation = "sor", cluster_points, cluster_graph, cluster_devices, cluster_out,
                              cluster_meta;
  std::optional<std::size_t> cluster_n, k_min, k_max, restarts, min_pts;
  std::optional<double> eps;
  auto* cluster = app.add_subcommand("cluster", "Cluster points (kmeans, dbscan) or a graph (louvain)");
  add_common(cluster, cluster_common);
  cluster->add_option("--method", cluster_method, "kmeans, dbscan or louvain")->required();
  cluster->add_option("--relation", cluster_relation, "Relation name, used for seed derivation");
  cluster->add_option("--points", cluster_points, "Points CSV (embeddings or t-SNE output)");
  cluster->add_option("--graph", cluster_graph, "Edge list CSV");
  cluster->add_option("--n", cluster_n, "Node count of the graph");
  cluster->add_option("--devices", cluster_devices, "Device catalog giving the node count");
  cluster->add_option("--eps", eps, "DBSCAN radius (median k-distance if omitted)");
  cluster->add_option("--min-pts", min_pts, "DBSCAN core threshold");
  cluster->add_option("--k-min", k_min, "Smallest K tried by the elbow search");
  cluster->add_option("--k-max", k_max, "Largest K tried by the elbow search");
  cluster->add_option("--restarts", restarts, "K-means restarts per K");
  cluster->add_option("--out", cluster_out, "Partition CSV")->required();
  cluster->add_option("--metadata", cluster_meta, "Metadata JSON (default: <out>.json)");

  // evaluate
  std::string eval_graph, eval_devices, eval_partition, eval_relation, eval_method, eval_out;
  std::optional<std::size_t> eval_n;
  bool eval_binarize = false;
  auto* evaluate = app.add_subcommand("evaluate", "Score a partition against a relation graph");
  evaluate->add_option("--graph", eval_graph, "Edge list CSV")->required();
  evaluate->add_option("--n", eval_n, "Node count of the graph");
  evaluate->add_option("--devices", eval_devices, "Device catalog giving the node count");
  evaluate->add_option("--partition", eval_partition, "Partition CSV")->required();
  evaluate->add_option("--relation", eval_relation, "Relation label for the report")->required();
  evaluate->add_option("--method", eval_method, "Method label for the report")->required();
  evaluate->add_option("--out", eval_out, "Metrics CSV (stdout if omitted)");
  evaluate->add_flag("--binarize", eval_binarize, "Score on unit weights");

  CLI11_PARSE(app, argc, argv);

  auto node_count = [](const std::optional<std::size_t>& n, const std::string& devices) -> std::size_t {
    if (n) return *n;
    if (devices.empty()) siot::fail(ErrorCode::ConfigError, "either --n or --devices is required");
    auto in = siot::csv::open_input(devices);
    return siot::parse_devices(in, devices).size();
  };

  try {
    if (run->parsed()) {
      PipelineConfig config = resolve(run_common);
      if (!run_scales.empty()) {
        config.scales.clear();
        for (const auto& s : split_list(run_scales)) {
          auto value = siot::csv::parse_number<std::size_t>(s);
          if (!value) siot::fail(ErrorCode::ConfigError, "--scales: '" + s + "' is not a device count");
          config.scales.push_back(*value);
        }
      }
      if (!run_relations.empty()) config.relations = split_list(run_relations);
      if (!run_methods.empty()) config.methods = split_list(run_methods);
      if (!run_dbscan_input.empty()) config.dbscan.input = run_dbscan_input;
      if (!run_kmeans_input.empty()) config.kmeans.input = run_kmeans_input;
      if (run_binarize) config.binarize = true;
      const auto result = siot::run_pipeline(config, run_out);
      std::cout << siot::kMetricsHeader << '\n';
      for (const auto& r : result.metrics) siot::write_metrics_row(std::cout, r);
    } else if (ingest->parsed()) {
      PipelineConfig config = resolve(ingest_common);
      if (!ingest_files.devices.empty()) {
        config.data.source = "files";
        config.data.devices = ingest_files.devices;
        config.data.friends = ingest_files.friends;
        config.data.encounters = ingest_files.encounters;
      }
      config.scales = {ingest_scale};
      siot::validate_config(config);
      siot::stages::ingest(config, ingest_scale, ingest_out);
    } else if (build->parsed()) {
      PipelineConfig config = resolve(graph_common);
      check_relation(graph_relation);
      if (radius_m) config.graph.clor_radius_m = *radius_m;
      if (sor_min) config.graph.sor_min_total_min = *sor_min;
      if (sor_saturation) config.graph.sor_saturation_min = *sor_saturation;
      const auto ds = read_dataset(graph_data);
      const auto g = siot::build_relation(ds, graph_relation, config.graph);
      if (graph_out.empty()) {
        siot::write_edge_list_csv(std::cout, g);
      } else {
        siot::detail::write_file(graph_out,
                                 siot::detail::render([&](std::ostream& o) { siot::write_edge_list_csv(o, g); }));
      }
    } else if (embed->parsed()) {
      PipelineConfig config = resolve(embed_common);
      check_relation(embed_relation);
      if (!embed_label_source.empty()) config.gnn.label_source = embed_label_source;
      const auto ds = read_dataset(embed_data);
      const auto g = siot::stages::read_graph(embed_graph, ds.catalog.size());
      const auto out = siot::stages::embed(ds, g, config, embed_relation, embed_out, embed_tsne);
      std::cout << "labeled " << out.labeled << " of " << ds.catalog.size() << " nodes, loss "
                << siot::csv::format_double(out.loss_trace.front()) << " -> "
                << siot::csv::format_double(out.loss_trace.back()) << '\n';
    } else if (cluster->parsed()) {
      PipelineConfig config = resolve(cluster_common);
      check_relation(cluster_relation);
      if (eps) config.dbscan.eps = *eps;
      if (min_pts) config.dbscan.min_pts = *min_pts;
      if (k_min) config.kmeans.k_min = *k_min;
      if (k_max) config.kmeans.k_max = *k_max;
      if (restarts) config.kmeans.restarts = *restarts;
      std::optional<siot::Matrix> points;
      std::optional<siot::WeightedGraph> graph;
      if (!cluster_points.empty()) points = siot::stages::read_points(cluster_points);
      if (!cluster_graph.empty()) {
        graph = siot::stages::read_graph(cluster_graph, node_count(cluster_n, cluster_devices));
      }
      const std::string meta = cluster_meta.empty() ? cluster_out + ".json" : cluster_meta;
      const auto outcome =
          siot::stages::cluster(cluster_method, config, cluster_relation, points, graph, cluster_out, meta);
      std::cout << outcome.partition.num_clusters << " clusters\n";
    } else if (evaluate->parsed()) {
      const auto g = siot::stages::read_graph(eval_graph, node_count(eval_n, eval_devices));
      const auto p = siot::stages::read_partition(eval_partition);
      const auto report = siot::score(g, p, eval_relation, eval_method, eval_binarize);
      const std::string text = siot::detail::render([&](std::ostream& o) {
        o << siot::kMetricsHeader << '\n';
        siot::write_metrics_row(o, report);
      });
      if (eval_out.empty()) {
        std::cout << text;
      } else {
        siot::detail::write_file(eval_out, text);
      }
    }
  } catch (const siot::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
