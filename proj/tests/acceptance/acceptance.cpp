// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "siot/siot.hpp"

using namespace siot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

WeightedGraph to_graph(std::size_t n, const std::vector<oracle::Edge>& edges) {
  std::vector<WeightedEdge> out;
  for (const auto& e : edges) out.push_back({e.u, e.v, e.w});
  return WeightedGraph::from_edge_list(n, out);
}

WeightedGraph two_triangles() {
  return WeightedGraph::from_edge_list(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome metric_oracles() {
  Outcome out;
  oracle::Gen gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen.below(7);
    const auto edges = oracle::random_graph(gen, n, gen.uniform(0.2, 1.0));
    const auto labels = oracle::random_labels(gen, n, 1 + gen.below(n));
    const auto g = to_graph(n, edges);
    const auto p = Partition::from_labels(labels);
    const double dq = std::abs(modularity(g, p) - oracle::modularity(n, edges, labels));
    const double dc = std::abs(coverage(g, p) - oracle::coverage(edges, labels));
    out.require(dq <= 1e-12 && dc <= 1e-12, "graph " + std::to_string(trial) + " differs from the double sum");
    out.require(modularity(g, Partition::all_in_one(n)) == 0.0, "all-in-one Q is not exactly 0");
    out.require(coverage(g, Partition::all_in_one(n)) == 1.0, "all-in-one coverage is not exactly 1");
  }
  if (out.ok) out.detail = "200 graphs";
  return out;
}

Outcome louvain_benchmark() {
  Outcome out;
  const auto g = two_triangles();
  const auto r = louvain(g, 0);
  const auto [best, best_q] = brute_force_max_modularity(g);
  out.require(r.partition.assignment == std::vector<std::size_t>{0, 0, 0, 1, 1, 1}, "not the triangle partition");
  out.require(std::abs(r.modularity - 5.0 / 14.0) <= 1e-12, "Q != 5/14");
  out.require(std::abs(coverage(g, r.partition) - 6.0 / 7.0) <= 1e-12, "Cov != 6/7");
  out.require(adjusted_rand_index(r.partition, best) == 1.0 && std::abs(best_q - r.modularity) <= 1e-12,
              "differs from brute force");
  if (out.ok) out.detail = "Q=" + csv::format_double(r.modularity);
  return out;
}

Outcome gradient_check() {
  Outcome out;
  oracle::Gen gen(6);
  const auto adj = normalize_adjacency(to_graph(6, oracle::random_graph(gen, 6, 0.5)));
  Matrix x(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = gen.uniform(-1.0, 1.0);
  }
  const GnnModel model = init_model(3, 2, 17, 4, 3, 0.0);
  const LabelMask mask{{0, 1, std::nullopt, 1, std::nullopt, 0}, 2};
  const auto grads = loss_and_gradients(model, adj, x, mask);
  auto loss_with = [&](Matrix GnnModel::*member, const oracle::Dense& w) {
    GnnModel probe = model;
    probe.*member = w;
    const auto probs = forward(probe, adj, x, Mode::Infer).probs;
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      if (mask.labels[i]) total -= std::log(probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*mask.labels[i])));
    }
    return total / 4.0;
  };
  double worst = 0.0;
  for (auto [member, analytic] : {std::pair{&GnnModel::w1, &grads.w1}, std::pair{&GnnModel::w2, &grads.w2},
                                  std::pair{&GnnModel::w_out, &grads.w_out}}) {
    const auto numeric = oracle::numeric_gradient(model.*member, [&](const oracle::Dense& w) { return loss_with(member, w); });
    worst = std::max(worst, oracle::relative_error(*analytic, numeric));
  }
  out.require(worst < 1e-5, "relative error " + csv::format_double(worst));
  if (out.ok) out.detail = "max relative error " + csv::format_double(worst);
  return out;
}

Outcome planted_recovery() {
  Outcome out;
  std::size_t recovered = 0, decreasing = 0;
  std::string aris;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig sc;  // n=200, 2 communities, p_in 0.1, p_out 0.01
    sc.seed = seed;
    const auto ds = generate_synthetic(sc);
    const auto g = build_sor(ds.catalog, ds.encounters, 10.0, 60.0);
    GnnConfig gc;
    gc.label_source = "ground_truth";
    const auto embedded = embed_relation(ds.catalog, g, gc, ds.ground_truth, "sor", seed);
    const auto km = kmeans_best_of(embedded.embeddings, 2, seed, 5);
    const double ari = adjusted_rand_index(km.partition, ds.ground_truth);
    recovered += ari >= 0.9 ? 1 : 0;
    decreasing += embedded.loss_trace.back() < embedded.loss_trace.front() ? 1 : 0;
    aris += (aris.empty() ? "" : " ") + csv::format_double(std::round(ari * 1000.0) / 1000.0);
  }
  out.require(recovered >= 4, "ARI >= 0.9 in only " + std::to_string(recovered) + " of 5 seeds");
  out.require(decreasing == 5, "loss decreased in only " + std::to_string(decreasing) + " of 5 seeds");
  out.detail = out.ok ? "ARI " + aris : out.detail + " (ARI " + aris + ")";
  return out;
}

Outcome dbscan_oracle() {
  Outcome out;
  oracle::Gen gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen.below(200);
    const auto dim = static_cast<Eigen::Index>(1 + gen.below(3));
    Matrix x(static_cast<Eigen::Index>(n), dim);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = 10.0 * gen.uniform();
    }
    const double eps = gen.uniform(0.2, 3.0);
    const std::size_t min_pts = 1 + gen.below(8);
    const auto p = dbscan(x, eps, min_pts);
    const auto expected = Partition::from_labels(oracle::dbscan(x, eps, min_pts));
    out.require(adjusted_rand_index(p, expected) == 1.0 || (n == 1 && p.num_clusters == 1),
                "instance " + std::to_string(trial) + " differs from the oracle");
  }
  // A far point in a dense blob stays on its own.
  Matrix blob(31, 2);
  for (Eigen::Index i = 0; i < 30; ++i) blob.row(i) << gen.uniform(), gen.uniform();
  blob.row(30) << 50.0, 50.0;
  const auto p = dbscan(blob, 0.5, 4);
  out.require(std::count(p.assignment.begin(), p.assignment.end(), p.assignment[30]) == 1,
              "isolated point is not a singleton");
  if (out.ok) out.detail = "100 instances";
  return out;
}

Outcome kmeans_properties() {
  Outcome out;
  oracle::Gen gen(55);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + gen.below(150);
    Matrix x(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << 10.0 * gen.uniform(), 10.0 * gen.uniform();
    const auto r = kmeans(x, 1 + gen.below(10), static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      out.require(r.inertia_trace[i] <= r.inertia_trace[i - 1], "inertia rose on instance " + std::to_string(trial));
    }
  }
  Matrix four(4, 2);
  four << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto r = kmeans(four, 2, 1);
  out.require(r.inertia == 1.0, "4-point inertia " + csv::format_double(r.inertia));
  if (out.ok) out.detail = "50 instances, 4-point inertia 1";
  return out;
}

Outcome tsne_properties() {
  Outcome out;
  oracle::Gen gen(3);
  oracle::Dense centers = oracle::Dense::Zero(3, 32);
  for (Eigen::Index c = 0; c < 3; ++c) centers(c, c) = 20.0;
  std::vector<std::size_t> truth;
  const Matrix x = oracle::blobs(gen, centers, 25, 1.0, &truth);
  TsneParams params;
  params.perplexity = 20.0;
  params.seed = 3;
  const auto p = tsne_affinities(x, params.perplexity);
  out.require(std::abs(p.sum() - 1.0) <= 1e-10, "affinities sum to " + csv::format_double(p.sum()));
  const auto result = tsne(x, params);
  for (std::size_t i = 1; i < result.kl_trace.size(); ++i) {
    out.require(result.kl_trace[i].second <= result.kl_trace[i - 1].second + 1e-6, "KL rose between checkpoints");
  }
  const auto km = kmeans_best_of(result.embedding, 3, 3, 5);
  const double ari = adjusted_rand_index(km.partition, Partition::from_labels(truth));
  out.require(ari == 1.0, "blob ARI " + csv::format_double(ari));
  if (out.ok) out.detail = "KL " + csv::format_double(result.kl_trace.back().second);
  return out;
}

Outcome harness_shape(const fs::path& work) {
  Outcome out;
  PipelineConfig c;
  c.scales = {1000};
  const auto result = run_pipeline(c, work / "grid");
  out.require(result.metrics.size() == 9, "expected 9 metrics rows");
  std::ifstream counts(work / "grid" / "cluster_counts.csv");
  std::string header, row;
  std::getline(counts, header);
  std::getline(counts, row);
  out.require(header == "scale,clor_kmeans,clor_dbscan,clor_louvain,sor_kmeans,sor_dbscan,sor_louvain,sfor_kmeans,"
                        "sfor_dbscan,sfor_louvain",
              "unexpected count table header");
  std::size_t dbscan_wins = 0;
  std::string table;
  for (std::size_t r = 0; r < 3; ++r) {
    const auto& km = result.metrics[3 * r];
    const auto& db = result.metrics[3 * r + 1];
    const auto& lv = result.metrics[3 * r + 2];
    dbscan_wins += db.num_clusters >= km.num_clusters ? 1 : 0;
    table += (r ? " " : "") + km.relation + "=" + std::to_string(km.num_clusters) + "/" +
             std::to_string(db.num_clusters) + "/" + std::to_string(lv.num_clusters);
  }
  out.require(dbscan_wins >= 2, "DBSCAN >= K-means in only " + std::to_string(dbscan_wins) + " relations");
  out.detail = out.ok ? table : out.detail + " (" + table + ")";
  return out;
}

Outcome determinism(const fs::path& work) {
  Outcome out;
  PipelineConfig c;
  c.scales = {200};
  run_pipeline(c, work / "det_a");
  run_pipeline(c, work / "det_b");
  const auto a = slurp(work / "det_a" / "metrics.csv");
  out.require(!a.empty() && a == slurp(work / "det_b" / "metrics.csv"), "metrics.csv differs between runs");
  if (out.ok) out.detail = std::to_string(a.size()) + " bytes identical";
  return out;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "siot_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    std::string name;
    double limit_s;  // 0 means no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric oracle equivalence", 10.0, metric_oracles},
      {"louvain benchmark instance", 1.0, louvain_benchmark},
      {"gradient check", 5.0, gradient_check},
      {"planted-partition recovery", 60.0, planted_recovery},
      {"dbscan oracle equivalence", 30.0, dbscan_oracle},
      {"k-means properties", 0.0, kmeans_properties},
      {"t-sne properties", 0.0, tsne_properties},
      {"harness shape (n=1000 grid)", 600.0, [&] { return harness_shape(work); }},
      {"determinism", 0.0, [&] { return determinism(work); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("threw ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && c.limit_s > 0.0 && seconds >= c.limit_s) {
      o.ok = false;
      o.detail = "over the " + csv::format_double(c.limit_s) + " s budget";
    }
    failures += o.ok ? 0 : 1;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds);
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << c.name << "  [" << timing << "]  " << o.detail << std::endl;
  }
  fs::remove_all(work);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
