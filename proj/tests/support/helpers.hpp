#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "siot/siot.hpp"

#define EXPECT_SIOT_ERROR(stmt, expected_code)                                   \
  do {                                                                           \
    try {                                                                        \
      stmt;                                                                      \
      ADD_FAILURE() << "expected " << siot::to_string(expected_code);            \
    } catch (const siot::Error& e) {                                             \
      EXPECT_EQ(e.code(), expected_code) << e.what();                            \
    }                                                                            \
  } while (false)

namespace testing_support {

inline siot::WeightedGraph to_graph(std::size_t n, const std::vector<oracle::Edge>& edges) {
  std::vector<siot::WeightedEdge> out;
  for (const auto& e : edges) out.push_back({e.u, e.v, e.w});
  return siot::WeightedGraph::from_edge_list(n, out);
}

inline std::vector<oracle::Edge> to_edges(const siot::WeightedGraph& g) {
  std::vector<oracle::Edge> out;
  for (const auto& e : g.edges()) out.push_back({e.u, e.v, e.w});
  return out;
}

/// Two unit triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
inline siot::WeightedGraph two_triangles() {
  return siot::WeightedGraph::from_edge_list(
      6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}});
}

inline siot::Matrix to_matrix(const oracle::Dense& d) { return siot::Matrix(d); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / ("siot_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline siot::DeviceRecord device(std::int64_t id, std::int64_t user, std::string type, double lat, double lon,
                                 std::string brand = "samsung", std::string mobility = "mobile",
                                 std::string battery = "yes") {
  siot::DeviceRecord r;
  r.original_id = id;
  r.user_id = user;
  r.device_type = std::move(type);
  r.brand = std::move(brand);
  r.mobility = std::move(mobility);
  r.battery = std::move(battery);
  r.latitude = lat;
  r.longitude = lon;
  return r;
}

}  // namespace testing_support
