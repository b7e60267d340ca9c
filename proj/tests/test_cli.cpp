#include <cstdio>
#include <numbers>

#include "helpers.hpp"

using testing_support::slurp;
using testing_support::TempDir;

namespace {

struct Run {
  int status;
  std::string output;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string command = std::string(SIOT_CLI_PATH) + " " + args + " 2>&1";
  Run r{0, {}};
  FILE* pipe = popen(command.c_str(), "r");
  char buffer[4096];
  std::size_t got;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) r.output.append(buffer, got);
  r.status = pclose(pipe);
  return r;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string two_devices_50m_apart() {
  const double lat2 = 43.0 + 50.0 / siot::kEarthRadiusM * 180.0 / std::numbers::pi;
  return "device_id,user_id,device_type,brand,mobility,battery,lat,lon\n"
         "1,1,pc,apple,static,yes,43.0,-3.0\n"
         "2,2,pc,apple,static,yes," + siot::csv::format_double(lat2) + ",-3.0\n";
}

}  // namespace

TEST(Cli, BuildGraphClorKernel) {
  TempDir dir("cli_clor");
  write(dir / "devices.csv", two_devices_50m_apart());
  const auto r = cli("build-graph --relation clor --radius-m 100 --devices " + (dir / "devices.csv").string() +
                     " --out " + (dir / "edges.csv").string());
  ASSERT_EQ(r.status, 0) << r.output;
  std::ifstream in(dir / "edges.csv");
  const auto g = siot::read_edge_list_csv(in, 2);
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_NEAR(g.edges()[0].w, 0.77880078307140, 1e-9);
}

TEST(Cli, DbscanWithoutEpsRecordsDefault) {
  TempDir dir("cli_dbscan");
  std::string points = "node_id,x,y\n";
  for (int i = 0; i < 20; ++i) points += std::to_string(i) + "," + std::to_string(i % 5) + "," + std::to_string(i / 5) + "\n";
  write(dir / "points.csv", points);
  const auto r = cli("cluster --method dbscan --points " + (dir / "points.csv").string() + " --out " +
                     (dir / "part.csv").string());
  ASSERT_EQ(r.status, 0) << r.output;
  const auto meta = siot::Json::parse(slurp(dir / "part.csv.json"));
  EXPECT_EQ(meta["eps_source"], "median_k_distance");
  EXPECT_EQ(meta["min_pts"], 4);
  EXPECT_GT(meta["eps"].get<double>(), 0.0);
}

TEST(Cli, EvaluateSizeMismatch) {
  TempDir dir("cli_eval");
  write(dir / "edges.csv", "u,v,w\n0,1,1\n1,2,1\n");
  write(dir / "part.csv", "node_id,cluster_id\n0,0\n1,0\n");
  const auto r = cli("evaluate --graph " + (dir / "edges.csv").string() + " --n 3 --partition " +
                     (dir / "part.csv").string() + " --relation sor --method louvain");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("LengthMismatch"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("2"), std::string::npos);
  EXPECT_NE(r.output.find("3"), std::string::npos);
}

TEST(Cli, ErrorsNameFileAndLine) {
  TempDir dir("cli_bad");
  write(dir / "devices.csv", "device_id,user_id,device_type,brand,mobility,battery,lat,lon\n1,1,pc,apple,static,yes,99,0\n");
  const auto r = cli("build-graph --relation clor --devices " + (dir / "devices.csv").string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("OutOfRangeCoordinate"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("devices.csv:2"), std::string::npos) << r.output;
}

TEST(Cli, StagesChainMatchesRun) {
  TempDir dir("cli_chain");
  const std::string d = dir.path().string();
  ASSERT_EQ(cli("run --out " + d + "/run --scales 100 --relations sor --methods louvain,dbscan --seed 5").status, 0);
  ASSERT_EQ(cli("ingest --scale 100 --seed 5 --out " + d + "/data").status, 0);
  ASSERT_EQ(cli("build-graph --relation sor --dataset " + d + "/data --out " + d + "/edges.csv").status, 0);
  ASSERT_EQ(cli("embed --relation sor --seed 5 --dataset " + d + "/data --graph " + d + "/edges.csv --out " + d + "/emb").status, 0);
  ASSERT_EQ(cli("cluster --method dbscan --relation sor --seed 5 --points " + d + "/emb/embeddings.csv --out " + d + "/db.csv").status, 0);
  ASSERT_EQ(cli("cluster --method louvain --relation sor --seed 5 --graph " + d + "/edges.csv --devices " + d +
                "/data/devices.csv --out " + d + "/lv.csv").status, 0);
  const auto lv = cli("evaluate --relation sor --method louvain --graph " + d + "/edges.csv --n 100 --partition " + d + "/lv.csv");
  const auto db = cli("evaluate --relation sor --method dbscan --graph " + d + "/edges.csv --n 100 --partition " + d + "/db.csv");
  ASSERT_EQ(lv.status, 0) << lv.output;
  const auto metrics = slurp(dir / "run" / "metrics.csv");
  const auto row = [](const std::string& text) { return text.substr(text.find('\n') + 1); };
  EXPECT_NE(metrics.find(row(lv.output)), std::string::npos) << metrics << lv.output;
  EXPECT_NE(metrics.find(row(db.output)), std::string::npos) << metrics << db.output;
  EXPECT_EQ(slurp(dir / "run" / "partitions" / "100_sor_louvain.csv"), slurp(dir / "lv.csv"));
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(cli("").status, 0);
  EXPECT_NE(cli("cluster --method kmeans --out /dev/null").status, 0);
  EXPECT_NE(cli("run --out /tmp/x --relations xor").status, 0);
}
