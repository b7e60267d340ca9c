#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "siot/error.hpp"
#include "siot/ingest.hpp"
#include "siot/random.hpp"

namespace siot {

struct TsneParams {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  double init_scale = 1e-4;
  double entropy_tolerance = 1e-5;
  std::vector<std::size_t> kl_checkpoints = {300, 600, 1000};
  std::uint64_t seed = 0;
};

struct TsneResult {
  Matrix embedding;                                     // n x 2, column means zero
  std::vector<std::pair<std::size_t, double>> kl_trace;  // (iteration, KL(P || Q))
};

namespace detail {
inline void check_tsne_input(std::size_t n, double perplexity) {
  if (n < 4) fail(ErrorCode::TooFewPoints, "t-SNE needs at least 4 points, got " + std::to_string(n));
  if (!(perplexity > 0.0)) fail(ErrorCode::InvalidParams, "perplexity must be positive");
  if (!(3.0 * perplexity < static_cast<double>(n))) {
    fail(ErrorCode::PerplexityTooLarge, "need 3 * perplexity < n (perplexity " + csv::format_double(perplexity) +
                                            ", n " + std::to_string(n) + ")");
  }
}

inline Matrix squared_distances(const Matrix& x) {
  const auto n = x.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}
}  // namespace detail

/// Symmetrized input affinities P = (P_{j|i} + P_{i|j}) / 2n, where each conditional
/// row is a Gaussian whose precision is bisected until its Shannon entropy equals
/// log(perplexity) within `entropy_tolerance` nats.
inline Matrix tsne_affinities(const Matrix& x, double perplexity, double entropy_tolerance = 1e-5) {
  const auto n = x.rows();
  detail::check_tsne_input(static_cast<std::size_t>(n), perplexity);
  const Matrix d = detail::squared_distances(x);
  const double target = std::log(perplexity);
  Matrix cond = Matrix::Zero(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, d(i, j));
    }
    double beta = 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 200; ++step) {
      double total = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          row[static_cast<std::size_t>(j)] = 0.0;
          continue;
        }
        const double shifted = d(i, j) - nearest;
        const double p = std::exp(-beta * shifted);
        row[static_cast<std::size_t>(j)] = p;
        total += p;
        weighted += shifted * p;
      }
      const double entropy = std::log(total) + beta * weighted / total;
      for (Eigen::Index j = 0; j < n; ++j) cond(i, j) = row[static_cast<std::size_t>(j)] / total;
      const double gap = entropy - target;
      if (std::abs(gap) < entropy_tolerance) break;
      if (gap > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
  }
  Matrix p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  return p;
}

/// KL(P || Q) for a given low-dimensional layout.
inline double tsne_kl_divergence(const Matrix& p, const Matrix& y) {
  const auto n = y.rows();
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) z += 2.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm()) / z;
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

/// Exact (all-pairs) t-SNE to two dimensions with early exaggeration and momentum.
inline TsneResult tsne(const Matrix& x, const TsneParams& params) {
  const auto n = x.rows();
  const Matrix p = tsne_affinities(x, params.perplexity, params.entropy_tolerance);

  Rng rng(params.seed);
  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = params.init_scale * rng.normal();
    y(i, 1) = params.init_scale * rng.normal();
  }
  Matrix velocity = Matrix::Zero(n, 2);
  Matrix grad(n, 2);
  Matrix kernel(n, n);

  TsneResult result;
  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration = iter < params.exaggeration_iterations ? params.exaggeration : 1.0;
    const double momentum = iter < params.momentum_switch ? params.initial_momentum : params.final_momentum;

    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double k = 1.0 / (1.0 + dx * dx + dy * dy);
        kernel(i, j) = k;
        kernel(j, i) = k;
        z += 2.0 * k;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double k = kernel(i, j);
        const double force = (exaggeration * p(i, j) - k / z) * k;
        gx += force * (y(i, 0) - y(j, 0));
        gy += force * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    velocity = momentum * velocity - params.learning_rate * grad;
    y += velocity;
    const Eigen::RowVector2d mean = y.colwise().mean();
    y.rowwise() -= mean;

    const std::size_t done = iter + 1;
    if (std::find(params.kl_checkpoints.begin(), params.kl_checkpoints.end(), done) != params.kl_checkpoints.end()) {
      result.kl_trace.emplace_back(done, tsne_kl_divergence(p, y));
    }
  }
  result.embedding = std::move(y);
  return result;
}

}  // namespace siot
