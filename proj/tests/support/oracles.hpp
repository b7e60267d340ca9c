#pragma once

// Slow, literal reference implementations used to check the library. None of these
// share code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Dense = Eigen::MatrixXd;

struct Edge {
  std::size_t u, v;
  double w;
};

inline Dense adjacency(std::size_t n, const std::vector<Edge>& edges) {
  Dense a = Dense::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) += e.w;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) += e.w;
  }
  return a;
}

/// Q = 1/2m * sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j], summed over all ordered pairs.
inline double modularity(std::size_t n, const std::vector<Edge>& edges, const std::vector<std::size_t>& label) {
  const Dense a = adjacency(n, edges);
  const Eigen::VectorXd k = a.rowwise().sum();
  const double two_m = k.sum();
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (label[i] != label[j]) continue;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      q += a(ii, jj) - k(ii) * k(jj) / two_m;
    }
  }
  return q / two_m;
}

/// Fraction of edge weight with both endpoints in one cluster.
inline double coverage(const std::vector<Edge>& edges, const std::vector<std::size_t>& label) {
  double inside = 0.0, total = 0.0;
  for (const auto& e : edges) {
    total += e.w;
    if (label[e.u] == label[e.v]) inside += e.w;
  }
  return inside / total;
}

/// Every set partition of {0..n-1}, generated recursively.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> label(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      visit(label);
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      label[i] = b;
      rec(i + 1, b == blocks ? blocks + 1 : blocks);
    }
  };
  if (n == 0) {
    visit(label);
    return;
  }
  rec(0, 0);
}

inline double max_modularity(std::size_t n, const std::vector<Edge>& edges) {
  double best = -1.0;
  for_each_partition(n, [&](const std::vector<std::size_t>& l) { best = std::max(best, modularity(n, edges, l)); });
  return best;
}

/// DBSCAN from the definition: cores are unioned when within eps of each other; a
/// border point joins the component of its lowest-indexed core neighbour's lowest
/// core member; every other point is its own cluster. Returns raw labels.
inline std::vector<std::size_t> dbscan(const Dense& x, double eps, std::size_t min_pts) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::vector<bool>> near(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      near[i][j] = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm() <= eps;
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = static_cast<std::size_t>(std::count(near[i].begin(), near[i].end(), true)) >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (core[i] && core[j] && near[i][j]) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Smallest member of each core component.
  std::map<std::size_t, std::size_t> min_member;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    auto [it, fresh] = min_member.try_emplace(find(i), i);
    if (!fresh) it->second = std::min(it->second, i);
  }
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      label[i] = min_member.at(find(i));
      continue;
    }
    // Border: the component first reached when expanding seeds in index order is the
    // one with the smallest minimum core member among adjacent components.
    std::size_t best = SIZE_MAX;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && near[i][j]) best = std::min(best, min_member.at(find(j)));
    }
    label[i] = best == SIZE_MAX ? n + i : best;
  }
  return label;
}

/// True when two labelings induce the same partition.
inline bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [x, fx] = ab.try_emplace(a[i], b[i]);
    auto [y, fy] = ba.try_emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
inline double spectral_radius(const Dense& m, int steps = 500) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd w = m * v;
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Generators. std::mt19937_64 raw output only; distributions are hand-rolled so the
// cases are the same on every standard library.

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

/// Random simple graph with at least one edge; weights in [0.1, 2].
inline std::vector<Edge> random_graph(Gen& g, std::size_t n, double density) {
  std::vector<Edge> edges;
  while (edges.empty()) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (g.uniform() < density) edges.push_back({u, v, g.uniform(0.1, 2.0)});
      }
    }
  }
  return edges;
}

inline std::vector<std::size_t> random_labels(Gen& g, std::size_t n, std::size_t k) {
  std::vector<std::size_t> l(n);
  for (auto& x : l) x = g.below(k);
  return l;
}

/// `per_blob` points around each of `centers`, isotropic with the given spread.
inline Dense blobs(Gen& g, const Dense& centers, std::size_t per_blob, double spread,
                   std::vector<std::size_t>* truth = nullptr) {
  const auto k = static_cast<std::size_t>(centers.rows());
  Dense x(static_cast<Eigen::Index>(k * per_blob), centers.cols());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      const auto row = static_cast<Eigen::Index>(c * per_blob + i);
      for (Eigen::Index d = 0; d < centers.cols(); ++d) {
        x(row, d) = centers(static_cast<Eigen::Index>(c), d) + spread * g.normal();
      }
      if (truth) truth->push_back(c);
    }
  }
  return x;
}

/// Max over each matrix of |a - f| relative to |a| + |f| (Frobenius).
inline double relative_error(const Dense& analytic, const Dense& numeric) {
  const double denom = analytic.norm() + numeric.norm();
  return denom == 0.0 ? 0.0 : (analytic - numeric).norm() / denom;
}

/// Central differences of a scalar function of one matrix.
inline Dense numeric_gradient(Dense w, const std::function<double(const Dense&)>& f, double h = 1e-5) {
  Dense grad(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double saved = w(i, j);
      w(i, j) = saved + h;
      const double up = f(w);
      w(i, j) = saved - h;
      const double down = f(w);
      w(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace oracle
