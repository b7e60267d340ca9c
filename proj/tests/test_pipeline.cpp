#include "helpers.hpp"

using namespace siot;
using testing_support::slurp;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config() {
  PipelineConfig c;
  c.scales = {120};
  c.seed = 11;
  c.kmeans.k_max = 8;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

}  // namespace

TEST(Config, RejectsUnknownAndInvalidSettings) {
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"sed": 1})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"gnn": {"hiden1": 3}})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"relations": ["clor", "xor"]})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"methods": []})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"seed": "seven"})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"dbscan": {"input": "raw"}})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(config_from_json(Json::parse(R"({"data": {"source": "files"}})")), ErrorCode::ConfigError);
  EXPECT_SIOT_ERROR(
      config_from_json(Json::parse(R"({"graph": {"sfor_weights": {"same_owner": 2, "friend": 0.5, "friend_of_friend": 0.25}}})")),
      ErrorCode::ConfigError);
}

TEST(Config, MaterializedDefaultsRoundTrip) {
  const auto c = config_from_json(Json::parse(R"({"seed": 3, "scales": [200], "dbscan": {"eps": 0.25}})"));
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.dbscan.eps, 0.25);
  const Json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(j["gnn"]["hidden2"], 32);
  EXPECT_EQ(j["gnn"]["label_fraction"], 0.05);
  EXPECT_EQ(j["dbscan"]["min_pts"], 4);
  EXPECT_EQ(config_to_json(PipelineConfig{})["scales"], Json::parse("[1000, 1500, 2000]"));
}

TEST(Pipeline, GridCardinality) {
  TempDir dir("grid");
  PipelineConfig c;
  c.scales = {200};
  c.methods = {"louvain"};
  c.relations = {"sor"};
  const auto result = run_pipeline(c, dir.path());
  EXPECT_EQ(result.metrics.size(), 1u);
  std::size_t partitions = 0;
  for (const auto& e : fs::directory_iterator(dir / "partitions")) partitions += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(partitions, 1u);
  EXPECT_TRUE(fs::exists(dir / "partitions" / "200_sor_louvain.csv"));
  const auto metrics = slurp(dir / "metrics.csv");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 2);
  EXPECT_EQ(slurp(dir / "cluster_counts.csv").substr(0, 18), "scale,sor_louvain\n");
}

TEST(Pipeline, FullGridIsDeterministicAndReplayableFromManifest) {
  TempDir a("det_a"), b("det_b"), replay("det_replay");
  const auto config = small_config();
  const auto result = run_pipeline(config, a.path());
  run_pipeline(config, b.path());
  EXPECT_EQ(result.metrics.size(), 9u);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));

  const Json manifest = Json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["metrics_variant"], "weighted");
  EXPECT_EQ(manifest["cells"].size(), 9u);
  run_pipeline(config_from_json(manifest["config"]), replay.path());
  const auto original = snapshot(a.path());
  const auto replayed = snapshot(replay.path());
  ASSERT_EQ(original.size(), replayed.size());
  for (const auto& [name, content] : original) {
    ASSERT_TRUE(replayed.count(name)) << name;
    EXPECT_EQ(replayed.at(name), content) << name;
  }
  for (const auto& r : result.metrics) {
    EXPECT_GE(r.coverage, 0.0);
    EXPECT_LE(r.coverage, 1.0);
    EXPECT_GE(r.modularity, -0.5);
    EXPECT_LE(r.modularity, 1.0);
  }
}

TEST(Pipeline, StagesComposeToTheSameMetrics) {
  TempDir whole("stage_whole"), staged("stage_parts");
  auto config = small_config();
  config.relations = {"sor", "sfor"};
  const auto result = run_pipeline(config, whole.path());

  const std::size_t scale = config.scales.front();
  stages::ingest(config, scale, staged / "data");
  const auto ds = stages::read_dataset_dir(staged / "data");
  std::vector<MetricsReport> reports;
  for (const auto& relation : config.relations) {
    const auto edges = staged / (relation + "_edges.csv");
    stages::build_graph(ds, relation, config.graph, edges);
    const auto g = stages::read_graph(edges.string(), ds.catalog.size());
    const auto embed_dir = staged / ("embed_" + relation);
    stages::embed(ds, g, config, relation, embed_dir, true);
    const auto embeddings = stages::read_points((embed_dir / "embeddings.csv").string());
    const auto reduced = stages::read_points((embed_dir / "tsne.csv").string());
    for (const auto& method : config.methods) {
      const auto part = staged / (relation + "_" + method + ".csv");
      std::optional<Matrix> points;
      if (method == "kmeans") points = reduced;
      if (method == "dbscan") points = embeddings;
      stages::cluster(method, config, relation, points, g, part, {});
      reports.push_back(score(g, stages::read_partition(part.string()), relation, method, false));
    }
  }
  ASSERT_EQ(reports.size(), result.metrics.size());
  std::ostringstream expected, actual;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    write_metrics_row(expected, result.metrics[i]);
    write_metrics_row(actual, reports[i]);
  }
  EXPECT_EQ(actual.str(), expected.str());
  EXPECT_EQ(slurp(staged / "embed_sor" / "embeddings.csv"), slurp(whole / "embeddings" / "120_sor.csv"));
}

TEST(Pipeline, BinarizeChangesOnlyScoring) {
  TempDir weighted("bin_w"), binary("bin_b");
  PipelineConfig c;
  c.scales = {150};
  c.relations = {"clor"};
  c.methods = {"louvain"};
  run_pipeline(c, weighted.path());
  c.binarize = true;
  const auto r = run_pipeline(c, binary.path());
  EXPECT_EQ(r.manifest["metrics_variant"], "binarized");
  EXPECT_EQ(slurp(weighted / "partitions" / "150_clor_louvain.csv"), slurp(binary / "partitions" / "150_clor_louvain.csv"));
}

TEST(Pipeline, ErrorsCarryRunContext) {
  TempDir dir("ctx");
  PipelineConfig c;
  c.scales = {50};
  c.data.source = "files";
  c.data.devices = (dir / "missing.csv").string();
  try {
    run_pipeline(c, dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("scale 50"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, FileSourceIsSubsampled) {
  TempDir dir("files");
  SyntheticConfig sc;
  sc.n = 300;
  sc.num_owners = 75;
  const auto ds = generate_synthetic(sc);
  {
    std::ofstream d(dir / "devices.csv"), e(dir / "encounters.csv"), f(dir / "friends.csv");
    write_devices_csv(d, ds.catalog);
    write_encounters_csv(e, ds.encounters, ds.catalog);
    write_friendships_csv(f, ds.friends);
  }
  PipelineConfig c;
  c.scales = {100};
  c.data.source = "files";
  c.data.devices = (dir / "devices.csv").string();
  c.data.encounters = (dir / "encounters.csv").string();
  c.data.friends = (dir / "friends.csv").string();
  c.methods = {"louvain"};
  c.relations = {"sor", "sfor"};
  const auto r = run_pipeline(c, dir / "out");
  ASSERT_EQ(r.metrics.size(), 2u);
  EXPECT_EQ(r.metrics[0].n, 100u);
}
