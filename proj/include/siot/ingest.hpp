#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/partition.hpp"
#include "siot/random.hpp"

namespace siot {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::string_view kDeviceHeader = "device_id,user_id,device_type,brand,mobility,battery,lat,lon";
inline constexpr std::string_view kFriendshipHeader = "user_a,user_b";
inline constexpr std::string_view kEncounterHeader = "device_u,device_v,duration_min";

inline constexpr std::array<std::string_view, 2> kMobilityVocabulary = {"mobile", "static"};
inline constexpr std::array<std::string_view, 2> kBatteryVocabulary = {"no", "yes"};

struct DeviceRecord {
  std::size_t device_id = 0;     // dense internal id
  std::int64_t original_id = 0;  // id as it appeared in the catalog
  std::int64_t user_id = 0;
  std::string device_type;
  std::string brand;
  std::string mobility;
  std::string battery;
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Parsed catalog: records indexed 0..n-1 plus the map back to catalog ids.
class DeviceCatalog {
 public:
  DeviceCatalog() = default;

  /// Takes records in order and assigns device_id = position. Original ids must be unique.
  explicit DeviceCatalog(std::vector<DeviceRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      records_[i].device_id = i;
      auto [it, inserted] = index_of_.try_emplace(records_[i].original_id, i);
      if (!inserted) {
        fail(ErrorCode::MalformedRow, "duplicate device_id " + std::to_string(records_[i].original_id));
      }
    }
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<DeviceRecord>& records() const { return records_; }
  const DeviceRecord& operator[](std::size_t i) const { return records_[i]; }

  std::int64_t original_id(std::size_t internal) const { return records_.at(internal).original_id; }

  std::optional<std::size_t> internal_id(std::int64_t original) const {
    auto it = index_of_.find(original);
    if (it == index_of_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<DeviceRecord> records_;
  std::unordered_map<std::int64_t, std::size_t> index_of_;
};

struct Encounter {
  std::size_t u = 0;
  std::size_t v = 0;
  double duration_min = 0.0;
};

struct EncounterLog {
  std::vector<Encounter> events;
};

/// Unordered owner pairs, canonical (a < b), sorted, without duplicates.
struct FriendshipList {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;

  static FriendshipList from_pairs(std::vector<std::pair<std::int64_t, std::int64_t>> pairs) {
    for (auto& [a, b] : pairs) {
      if (a == b) fail(ErrorCode::MalformedRow, "self friendship for user " + std::to_string(a));
      if (a > b) std::swap(a, b);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return {std::move(pairs)};
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {
template <std::size_t N>
bool in_vocabulary(const std::array<std::string_view, N>& vocab, std::string_view value) {
  return std::find(vocab.begin(), vocab.end(), value) != vocab.end();
}

inline void validate_coordinates(double lat, double lon, const std::string& where) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    fail(ErrorCode::OutOfRangeCoordinate, where + ": latitude " + csv::format_double(lat) + " outside [-90, 90]");
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    fail(ErrorCode::OutOfRangeCoordinate, where + ": longitude " + csv::format_double(lon) + " outside [-180, 180]");
  }
}
}  // namespace detail

inline DeviceCatalog parse_devices(std::istream& in, std::string_view source = "devices") {
  const auto rows = csv::read_table(in, kDeviceHeader, source);
  std::vector<DeviceRecord> records;
  records.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    const std::string where = csv::where(source, line);
    const auto id = csv::parse_number<std::int64_t>(f[0]);
    const auto user = csv::parse_number<std::int64_t>(f[1]);
    const auto lat = csv::parse_number<double>(f[6]);
    const auto lon = csv::parse_number<double>(f[7]);
    if (!id || !user || !lat || !lon) fail(ErrorCode::MalformedRow, where + ": non-numeric id or coordinate");
    if (f[2].empty() || f[3].empty()) fail(ErrorCode::MalformedRow, where + ": empty device_type or brand");
    if (!detail::in_vocabulary(kMobilityVocabulary, f[4])) {
      fail(ErrorCode::UnknownCategory, where + ": mobility '" + f[4] + "' not in {mobile, static}");
    }
    if (!detail::in_vocabulary(kBatteryVocabulary, f[5])) {
      fail(ErrorCode::UnknownCategory, where + ": battery '" + f[5] + "' not in {no, yes}");
    }
    detail::validate_coordinates(*lat, *lon, where);
    records.push_back({0, *id, *user, f[2], f[3], f[4], f[5], *lat, *lon});
  }
  try {
    return DeviceCatalog(std::move(records));
  } catch (const Error& e) {
    throw e.with_context(std::string(source));
  }
}

inline FriendshipList parse_friendships(std::istream& in, std::string_view source = "friendships") {
  const auto rows = csv::read_table(in, kFriendshipHeader, source);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  pairs.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    const auto a = csv::parse_number<std::int64_t>(f[0]);
    const auto b = csv::parse_number<std::int64_t>(f[1]);
    if (!a || !b) fail(ErrorCode::MalformedRow, csv::where(source, line) + ": non-integer user id");
    if (*a == *b) fail(ErrorCode::MalformedRow, csv::where(source, line) + ": self friendship");
    pairs.emplace_back(*a, *b);
  }
  return FriendshipList::from_pairs(std::move(pairs));
}

/// Encounter device ids are catalog (original) ids; they are mapped to internal ids.
inline EncounterLog parse_encounters(std::istream& in, const DeviceCatalog& catalog,
                                     std::string_view source = "encounters") {
  const auto rows = csv::read_table(in, kEncounterHeader, source);
  EncounterLog log;
  log.events.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    const std::string where = csv::where(source, line);
    const auto u = csv::parse_number<std::int64_t>(f[0]);
    const auto v = csv::parse_number<std::int64_t>(f[1]);
    const auto minutes = csv::parse_number<double>(f[2]);
    if (!u || !v || !minutes) fail(ErrorCode::MalformedRow, where + ": non-numeric field");
    if (*u == *v) fail(ErrorCode::MalformedRow, where + ": encounter of a device with itself");
    if (!(*minutes > 0.0) || !std::isfinite(*minutes)) {
      fail(ErrorCode::MalformedRow, where + ": duration must be positive");
    }
    const auto iu = catalog.internal_id(*u);
    const auto iv = catalog.internal_id(*v);
    if (!iu || !iv) fail(ErrorCode::MalformedRow, where + ": device id not in catalog");
    log.events.push_back({*iu, *iv, *minutes});
  }
  return log;
}

inline void write_devices_csv(std::ostream& out, const DeviceCatalog& catalog) {
  out << kDeviceHeader << '\n';
  for (const auto& d : catalog.records()) {
    out << d.original_id << ',' << d.user_id << ',' << d.device_type << ',' << d.brand << ',' << d.mobility << ','
        << d.battery << ',' << csv::format_double(d.latitude) << ',' << csv::format_double(d.longitude) << '\n';
  }
}

inline void write_friendships_csv(std::ostream& out, const FriendshipList& friends) {
  out << kFriendshipHeader << '\n';
  for (const auto& [a, b] : friends.edges) out << a << ',' << b << '\n';
}

inline void write_encounters_csv(std::ostream& out, const EncounterLog& log, const DeviceCatalog& catalog) {
  out << kEncounterHeader << '\n';
  for (const auto& e : log.events) {
    out << catalog.original_id(e.u) << ',' << catalog.original_id(e.v) << ',' << csv::format_double(e.duration_min)
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Feature encoding

struct FeatureColumn {
  std::string attribute;  // "battery", "brand", "device_type", "mobility" or "geo"
  std::string category;   // category value, or "lat"/"lon" for geo
};

struct FeatureMatrix {
  Matrix values;
  std::vector<FeatureColumn> column_schema;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(values.cols()); }
};

/// One-hot blocks for the four categorical attributes (attribute name order, categories
/// sorted), followed by min-max scaled latitude and longitude.
inline FeatureMatrix encode_features(const DeviceCatalog& catalog) {
  if (catalog.empty()) fail(ErrorCode::EmptyCatalog, "cannot encode features of an empty catalog");

  using Getter = const std::string& (*)(const DeviceRecord&);
  const std::array<std::pair<std::string_view, Getter>, 4> attributes = {{
      {"battery", [](const DeviceRecord& d) -> const std::string& { return d.battery; }},
      {"brand", [](const DeviceRecord& d) -> const std::string& { return d.brand; }},
      {"device_type", [](const DeviceRecord& d) -> const std::string& { return d.device_type; }},
      {"mobility", [](const DeviceRecord& d) -> const std::string& { return d.mobility; }},
  }};

  FeatureMatrix fm;
  std::vector<std::map<std::string, std::size_t>> column_of(attributes.size());
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    std::set<std::string> vocab;
    for (const auto& d : catalog.records()) vocab.insert(attributes[a].second(d));
    for (const auto& category : vocab) {
      column_of[a][category] = fm.column_schema.size();
      fm.column_schema.push_back({std::string(attributes[a].first), category});
    }
  }
  const std::size_t lat_col = fm.column_schema.size();
  fm.column_schema.push_back({"geo", "lat"});
  fm.column_schema.push_back({"geo", "lon"});

  const std::size_t n = catalog.size();
  fm.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(fm.column_schema.size()));

  auto [lat_min, lat_max] = std::minmax_element(catalog.records().begin(), catalog.records().end(),
                                                [](const auto& x, const auto& y) { return x.latitude < y.latitude; });
  auto [lon_min, lon_max] = std::minmax_element(
      catalog.records().begin(), catalog.records().end(),
      [](const auto& x, const auto& y) { return x.longitude < y.longitude; });
  const double lat_lo = lat_min->latitude, lat_span = lat_max->latitude - lat_lo;
  const double lon_lo = lon_min->longitude, lon_span = lon_max->longitude - lon_lo;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = catalog[i];
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      fm.values(row, static_cast<Eigen::Index>(column_of[a].at(attributes[a].second(d)))) = 1.0;
    }
    // A constant coordinate scales to 0.
    fm.values(row, static_cast<Eigen::Index>(lat_col)) = lat_span > 0.0 ? (d.latitude - lat_lo) / lat_span : 0.0;
    fm.values(row, static_cast<Eigen::Index>(lat_col + 1)) =
        lon_span > 0.0 ? (d.longitude - lon_lo) / lon_span : 0.0;
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticConfig {
  std::size_t n = 200;
  std::size_t num_owners = 50;
  std::size_t num_communities = 2;
  double p_in = 0.1;
  double p_out = 0.01;
  double geo_cluster_spread_m = 150.0;
  std::uint64_t seed = 1;
};

struct SyntheticDataset {
  DeviceCatalog catalog;
  FriendshipList friends;
  EncounterLog encounters;
  Partition ground_truth;
};

namespace detail {
inline constexpr double kMetersPerDegreeLat = 111320.0;
inline constexpr double kBaseLatitude = 43.4623;
inline constexpr double kBaseLongitude = -3.8098;

struct TypeProfile {
  std::string_view type;
  std::string_view mobility;
  std::string_view battery;
};

inline constexpr std::array<TypeProfile, 6> kSyntheticTypes = {{
    {"car", "mobile", "yes"},
    {"pc", "static", "no"},
    {"sensor", "static", "yes"},
    {"smart_fitness", "mobile", "yes"},
    {"smart_tv", "static", "no"},
    {"smartphone", "mobile", "yes"},
}};

inline constexpr std::array<std::string_view, 4> kSyntheticBrands = {"apple", "huawei", "lenovo", "samsung"};
}  // namespace detail

/// Devices in per-community geographic blobs, owners confined to communities,
/// friendships and encounters sampled with p_in inside a community and p_out across.
inline SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_communities < 1 || cfg.n < cfg.num_communities) {
    fail(ErrorCode::InvalidConfig, "need n >= num_communities >= 1");
  }
  if (!(cfg.p_out >= 0.0 && cfg.p_out <= cfg.p_in && cfg.p_in <= 1.0)) {
    fail(ErrorCode::InvalidConfig, "need 0 <= p_out <= p_in <= 1");
  }
  if (cfg.num_owners < 1) fail(ErrorCode::InvalidConfig, "need num_owners >= 1");
  if (!(cfg.geo_cluster_spread_m > 0.0)) fail(ErrorCode::InvalidConfig, "need geo_cluster_spread_m > 0");

  Rng rng(cfg.seed);
  const std::size_t n = cfg.n;
  const std::size_t k = cfg.num_communities;

  std::vector<std::size_t> community(n);
  for (std::size_t i = 0; i < n; ++i) community[i] = i * k / n;

  std::vector<std::size_t> owner_community(cfg.num_owners);
  std::vector<std::vector<std::int64_t>> owners_in(k);
  for (std::size_t o = 0; o < cfg.num_owners; ++o) {
    owner_community[o] = o * k / cfg.num_owners;
    owners_in[owner_community[o]].push_back(static_cast<std::int64_t>(o));
  }

  // Community centres on a square grid spaced ten spreads apart.
  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
  const double spacing = 10.0 * cfg.geo_cluster_spread_m;
  const double meters_per_degree_lon = detail::kMetersPerDegreeLat * std::cos(detail::kBaseLatitude * std::numbers::pi / 180.0);

  std::vector<DeviceRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = community[i];
    const auto& pool = owners_in[c];
    const std::int64_t owner = pool.empty() ? static_cast<std::int64_t>(rng.below(cfg.num_owners))
                                            : pool[rng.below(pool.size())];

    const std::size_t type_index =
        rng.bernoulli(0.6) ? c % detail::kSyntheticTypes.size() : rng.below(detail::kSyntheticTypes.size());
    const auto& profile = detail::kSyntheticTypes[type_index];
    const std::size_t brand_index =
        rng.bernoulli(0.5) ? c % detail::kSyntheticBrands.size() : rng.below(detail::kSyntheticBrands.size());

    const double east = static_cast<double>(c % grid) * spacing + rng.normal(0.0, cfg.geo_cluster_spread_m);
    const double north = static_cast<double>(c / grid) * spacing + rng.normal(0.0, cfg.geo_cluster_spread_m);

    DeviceRecord d;
    d.original_id = static_cast<std::int64_t>(i);
    d.user_id = owner;
    d.device_type = profile.type;
    d.brand = detail::kSyntheticBrands[brand_index];
    d.mobility = profile.mobility;
    d.battery = profile.battery;
    d.latitude = detail::kBaseLatitude + north / detail::kMetersPerDegreeLat;
    d.longitude = detail::kBaseLongitude + east / meters_per_degree_lon;
    records.push_back(std::move(d));
  }

  std::vector<std::pair<std::int64_t, std::int64_t>> friend_pairs;
  for (std::size_t a = 0; a < cfg.num_owners; ++a) {
    for (std::size_t b = a + 1; b < cfg.num_owners; ++b) {
      const double p = owner_community[a] == owner_community[b] ? cfg.p_in : cfg.p_out;
      if (rng.bernoulli(p)) friend_pairs.emplace_back(a, b);
    }
  }

  EncounterLog log;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = community[u] == community[v] ? cfg.p_in : cfg.p_out;
      if (rng.bernoulli(p)) log.events.push_back({u, v, rng.uniform(5.0, 120.0)});
    }
  }

  return {DeviceCatalog(std::move(records)), FriendshipList::from_pairs(std::move(friend_pairs)), std::move(log),
          Partition::from_labels(community)};
}

/// Seeded uniform subsample of `count` devices. Relative catalog order is preserved,
/// and encounters touching dropped devices are removed.
inline std::pair<DeviceCatalog, EncounterLog> subsample(const DeviceCatalog& catalog, const EncounterLog& log,
                                                        std::size_t count, std::uint64_t seed) {
  if (count >= catalog.size()) return {catalog, log};
  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(count);
  std::sort(order.begin(), order.end());

  constexpr auto kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> new_index(catalog.size(), kDropped);
  std::vector<DeviceRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[order[i]] = i;
    records.push_back(catalog[order[i]]);
  }
  EncounterLog kept;
  for (const auto& e : log.events) {
    if (new_index[e.u] != kDropped && new_index[e.v] != kDropped) {
      kept.events.push_back({new_index[e.u], new_index[e.v], e.duration_min});
    }
  }
  return {DeviceCatalog(std::move(records)), std::move(kept)};
}

}  // namespace siot
