#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/graph.hpp"
#include "siot/ingest.hpp"
#include "siot/random.hpp"

namespace siot {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
struct NormalizedAdjacency {
  SparseMatrix values;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  Matrix to_dense() const { return Matrix(values); }
};

inline NormalizedAdjacency normalize_adjacency(const WeightedGraph& g) {
  const std::size_t n = g.n();
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t v = 0; v < n; ++v) inv_sqrt_degree[v] = 1.0 / std::sqrt(1.0 + g.strength(v));

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(n + 2 * g.num_edges());
  for (std::size_t v = 0; v < n; ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    entries.emplace_back(i, i, inv_sqrt_degree[v] * inv_sqrt_degree[v]);
  }
  for (const auto& e : g.edges()) {
    const double value = e.w * inv_sqrt_degree[e.u] * inv_sqrt_degree[e.v];
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    entries.emplace_back(u, v, value);
    entries.emplace_back(v, u, value);
  }
  NormalizedAdjacency adj;
  adj.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  adj.values.setFromTriplets(entries.begin(), entries.end());
  adj.values.makeCompressed();
  return adj;
}

inline constexpr std::size_t kDefaultHidden1 = 64;
inline constexpr std::size_t kDefaultHidden2 = 32;

/// Two message-passing layers followed by a dense softmax head: d -> h1 -> h2 -> classes.
struct GnnModel {
  Matrix w1;     // d x h1
  Matrix w2;     // h1 x h2
  Matrix w_out;  // h2 x classes
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden1() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden2() const { return static_cast<std::size_t>(w2.cols()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(w_out.cols()); }
};

namespace detail {
inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}
}  // namespace detail

inline GnnModel init_model(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed,
                           std::size_t hidden1 = kDefaultHidden1, std::size_t hidden2 = kDefaultHidden2,
                           double dropout_rate = 0.5) {
  if (input_dim == 0 || hidden1 == 0 || hidden2 == 0 || num_classes == 0) {
    fail(ErrorCode::DimensionMismatch, "all layer sizes must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail(ErrorCode::InvalidParams, "dropout rate must be in [0, 1)");
  Rng rng(seed);
  GnnModel model;
  model.w1 = detail::glorot_uniform(input_dim, hidden1, rng);
  model.w2 = detail::glorot_uniform(hidden1, hidden2, rng);
  model.w_out = detail::glorot_uniform(hidden2, num_classes, rng);
  model.dropout_rate = dropout_rate;
  model.seed = seed;
  return model;
}

enum class Mode { Train, Infer };

struct ForwardResult {
  Matrix z1;     // n x h1 (after dropout in train mode)
  Matrix z2;     // n x h2 (after dropout in train mode)
  Matrix probs;  // n x classes
};

namespace detail {

/// Everything backpropagation needs from one forward pass.
struct ForwardTape {
  Matrix ax;      // A X
  Matrix h1;      // A X W1
  Matrix keep1;   // dropout scale per entry (1 in infer mode)
  Matrix z1;      // relu(h1) * keep1
  Matrix az1;     // A z1
  Matrix h2;      // A z1 W2
  Matrix keep2;
  Matrix z2;      // relu(h2) * keep2
  Matrix probs;
};

inline void check_dimensions(const GnnModel& model, const NormalizedAdjacency& adj, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != adj.n()) {
    fail(ErrorCode::DimensionMismatch, "feature rows " + std::to_string(x.rows()) + " vs graph nodes " +
                                           std::to_string(adj.n()));
  }
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    fail(ErrorCode::DimensionMismatch, "feature columns " + std::to_string(x.cols()) + " vs model input " +
                                           std::to_string(model.input_dim()));
  }
  if (model.w2.rows() != model.w1.cols() || model.w_out.rows() != model.w2.cols()) {
    fail(ErrorCode::DimensionMismatch, "model layer sizes do not chain");
  }
}

inline Matrix dropout_scale(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix keep(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) keep(i, j) = rng.uniform() < rate ? 0.0 : scale;
  }
  return keep;
}

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double peak = logits.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - peak);
      total += out(i, j);
    }
    out.row(i) /= total;
  }
  return out;
}

inline ForwardTape forward_tape(const GnnModel& model, const NormalizedAdjacency& adj, const Matrix& ax, Mode mode,
                                double dropout_rate, Rng& rng) {
  ForwardTape t;
  t.ax = ax;
  const auto n = static_cast<Eigen::Index>(adj.n());
  const bool drop = mode == Mode::Train && dropout_rate > 0.0;

  t.h1 = t.ax * model.w1;
  t.keep1 = drop ? dropout_scale(n, t.h1.cols(), dropout_rate, rng) : Matrix::Ones(n, t.h1.cols());
  t.z1 = t.h1.cwiseMax(0.0).cwiseProduct(t.keep1);

  t.az1 = adj.values * t.z1;
  t.h2 = t.az1 * model.w2;
  t.keep2 = drop ? dropout_scale(n, t.h2.cols(), dropout_rate, rng) : Matrix::Ones(n, t.h2.cols());
  t.z2 = t.h2.cwiseMax(0.0).cwiseProduct(t.keep2);

  t.probs = softmax_rows(t.z2 * model.w_out);
  return t;
}

}  // namespace detail

/// Full forward pass. Train mode applies inverted dropout (rate from the model) after
/// each rectified layer, drawn from `seed`; infer mode is deterministic.
inline ForwardResult forward(const GnnModel& model, const NormalizedAdjacency& adj, const Matrix& x, Mode mode,
                             std::uint64_t seed = 0) {
  detail::check_dimensions(model, adj, x);
  Rng rng(seed);
  auto tape = detail::forward_tape(model, adj, adj.values * x, mode, model.dropout_rate, rng);
  return {std::move(tape.z1), std::move(tape.z2), std::move(tape.probs)};
}

/// Per-node optional class index; classes are 0..num_classes-1.
struct LabelMask {
  std::vector<std::optional<std::size_t>> labels;
  std::size_t num_classes = 0;

  std::size_t labeled_count() const {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); }));
  }
};

/// Dense class ids from string categories, classes ordered lexicographically.
inline std::pair<std::vector<std::size_t>, std::vector<std::string>> classes_from_categories(
    const std::vector<std::string>& categories) {
  std::set<std::string> unique(categories.begin(), categories.end());
  std::vector<std::string> names(unique.begin(), unique.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  std::vector<std::size_t> classes;
  classes.reserve(categories.size());
  for (const auto& c : categories) classes.push_back(index.at(c));
  return {std::move(classes), std::move(names)};
}

/// Stratified sample: in every class, max(1, round(fraction * class size)) seeded picks are labeled.
inline LabelMask stratified_label_mask(const std::vector<std::size_t>& classes, std::size_t num_classes,
                                       double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCode::InvalidParams, "label fraction must be in (0, 1]");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] >= num_classes) fail(ErrorCode::DimensionMismatch, "class id out of range");
    members[classes[i]].push_back(i);
  }
  LabelMask mask{std::vector<std::optional<std::size_t>>(classes.size()), num_classes};
  Rng rng(seed);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& pool = members[c];
    if (pool.empty()) continue;
    rng.shuffle(std::span<std::size_t>(pool));
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size()))));
    for (std::size_t k = 0; k < std::min(take, pool.size()); ++k) mask.labels[pool[k]] = c;
  }
  return mask;
}

struct Gradients {
  double loss = 0.0;
  Matrix w1;
  Matrix w2;
  Matrix w_out;
};

namespace detail {

inline void check_mask(const GnnModel& model, const NormalizedAdjacency& adj, const LabelMask& mask) {
  if (mask.labels.size() != adj.n()) {
    fail(ErrorCode::DimensionMismatch, "label mask covers " + std::to_string(mask.labels.size()) +
                                           " nodes, graph has " + std::to_string(adj.n()));
  }
  if (mask.labeled_count() == 0) fail(ErrorCode::EmptyLabelMask, "no labeled nodes");
  if (model.num_classes() < 2) fail(ErrorCode::DimensionMismatch, "need at least two output classes");
  for (const auto& l : mask.labels) {
    if (l && *l >= model.num_classes()) {
      fail(ErrorCode::DimensionMismatch, "label " + std::to_string(*l) + " exceeds model classes");
    }
  }
}

/// Mean cross-entropy over labeled nodes and its exact gradient, given a forward tape.
inline Gradients backward(const GnnModel& model, const NormalizedAdjacency& adj, const ForwardTape& t,
                          const LabelMask& mask) {
  const double labeled = static_cast<double>(mask.labeled_count());
  Gradients g;
  Matrix d_logits = Matrix::Zero(t.probs.rows(), t.probs.cols());
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    if (!mask.labels[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const auto label = static_cast<Eigen::Index>(*mask.labels[i]);
    g.loss -= std::log(t.probs(row, label));
    d_logits.row(row) = t.probs.row(row);
    d_logits(row, label) -= 1.0;
  }
  g.loss /= labeled;
  d_logits /= labeled;

  g.w_out = t.z2.transpose() * d_logits;
  const Matrix d_h2 = (d_logits * model.w_out.transpose())
                          .cwiseProduct(t.keep2)
                          .cwiseProduct((t.h2.array() > 0.0).cast<double>().matrix());
  g.w2 = t.az1.transpose() * d_h2;
  // The normalized adjacency is symmetric, so its transpose is itself.
  const Matrix d_z1 = adj.values * (d_h2 * model.w2.transpose());
  const Matrix d_h1 = d_z1.cwiseProduct(t.keep1).cwiseProduct((t.h1.array() > 0.0).cast<double>().matrix());
  g.w1 = t.ax.transpose() * d_h1;
  return g;
}

}  // namespace detail

/// Masked mean cross-entropy and its gradient w.r.t. all three weight matrices.
inline Gradients loss_and_gradients(const GnnModel& model, const NormalizedAdjacency& adj, const Matrix& x,
                                    const LabelMask& mask, Mode mode = Mode::Infer, std::uint64_t seed = 0) {
  detail::check_dimensions(model, adj, x);
  detail::check_mask(model, adj, mask);
  Rng rng(seed);
  const auto tape = detail::forward_tape(model, adj, adj.values * x, mode, model.dropout_rate, rng);
  return detail::backward(model, adj, tape, mask);
}

struct TrainParams {
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainResult {
  GnnModel model;
  std::vector<double> loss_trace;  // training-mode loss at each epoch, before its update
};

/// Full-batch Adam on the masked loss. Each epoch draws fresh dropout masks from a
/// generator seeded once with params.seed.
inline TrainResult train(GnnModel model, const NormalizedAdjacency& adj, const Matrix& x, const LabelMask& mask,
                         const TrainParams& params) {
  detail::check_dimensions(model, adj, x);
  detail::check_mask(model, adj, mask);
  if (!(params.dropout >= 0.0 && params.dropout < 1.0)) fail(ErrorCode::InvalidParams, "dropout must be in [0, 1)");
  model.dropout_rate = params.dropout;

  struct Moments {
    Matrix m, v;
  };
  auto zero_like = [](const Matrix& w) { return Moments{Matrix::Zero(w.rows(), w.cols()), Matrix::Zero(w.rows(), w.cols())}; };
  Moments m1 = zero_like(model.w1), m2 = zero_like(model.w2), m_out = zero_like(model.w_out);

  const Matrix ax = adj.values * x;
  Rng rng(params.seed);
  TrainResult result;
  result.loss_trace.reserve(params.epochs);
  double beta1_t = 1.0, beta2_t = 1.0;

  auto adam_step = [&](Matrix& w, Moments& mom, const Matrix& grad) {
    mom.m = params.beta1 * mom.m + (1.0 - params.beta1) * grad;
    mom.v = params.beta2 * mom.v + (1.0 - params.beta2) * grad.cwiseProduct(grad);
    const double lr_t = params.learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
    w.array() -= lr_t * mom.m.array() / (mom.v.array().sqrt() + params.epsilon);
  };

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const auto tape = detail::forward_tape(model, adj, ax, Mode::Train, params.dropout, rng);
    const auto grads = detail::backward(model, adj, tape, mask);
    result.loss_trace.push_back(grads.loss);
    beta1_t *= params.beta1;
    beta2_t *= params.beta2;
    adam_step(model.w1, m1, grads.w1);
    adam_step(model.w2, m2, grads.w2);
    adam_step(model.w_out, m_out, grads.w_out);
  }
  result.model = std::move(model);
  return result;
}

/// Node embeddings: the second message-passing layer in infer mode (n x h2, non-negative).
inline Matrix extract_embeddings(const GnnModel& model, const NormalizedAdjacency& adj, const Matrix& x) {
  return forward(model, adj, x, Mode::Infer).z2;
}

// ---------------------------------------------------------------------------
// Files

inline constexpr std::string_view kCheckpointMagic = "siot-gnn-checkpoint v1";

inline void save_checkpoint(std::ostream& out, const GnnModel& model) {
  out << kCheckpointMagic << '\n';
  out << "input_dim " << model.input_dim() << '\n';
  out << "hidden1 " << model.hidden1() << '\n';
  out << "hidden2 " << model.hidden2() << '\n';
  out << "classes " << model.num_classes() << '\n';
  out << "seed " << model.seed << '\n';
  out << "dropout " << csv::format_double(model.dropout_rate) << '\n';
  auto write_matrix = [&](std::string_view name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << csv::format_double(m(i, j));
      out << '\n';
    }
  };
  write_matrix("W1", model.w1);
  write_matrix("W2", model.w2);
  write_matrix("W_out", model.w_out);
}

inline GnnModel load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != kCheckpointMagic) {
    fail(ErrorCode::MalformedRow, "checkpoint: missing '" + std::string(kCheckpointMagic) + "' header");
  }
  auto expect_field = [&](std::string_view key) {
    std::string name;
    std::string value;
    if (!(in >> name >> value) || name != key) {
      fail(ErrorCode::MalformedRow, "checkpoint: expected field '" + std::string(key) + "'");
    }
    return value;
  };
  auto as_size = [](const std::string& s) {
    auto v = csv::parse_number<std::size_t>(s);
    if (!v) fail(ErrorCode::MalformedRow, "checkpoint: bad integer '" + s + "'");
    return *v;
  };
  const std::size_t d = as_size(expect_field("input_dim"));
  const std::size_t h1 = as_size(expect_field("hidden1"));
  const std::size_t h2 = as_size(expect_field("hidden2"));
  const std::size_t c = as_size(expect_field("classes"));
  GnnModel model;
  model.seed = csv::parse_number<std::uint64_t>(expect_field("seed")).value_or(0);
  model.dropout_rate = csv::parse_number<double>(expect_field("dropout")).value_or(0.5);

  auto read_matrix = [&](std::string_view name, std::size_t rows, std::size_t cols) {
    std::string tag;
    std::size_t r = 0, k = 0;
    if (!(in >> tag >> r >> k) || tag != name || r != rows || k != cols) {
      fail(ErrorCode::DimensionMismatch, "checkpoint: matrix " + std::string(name) + " has unexpected shape");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::string token;
        if (!(in >> token)) fail(ErrorCode::MalformedRow, "checkpoint: truncated matrix " + std::string(name));
        auto v = csv::parse_number<double>(token);
        if (!v) fail(ErrorCode::MalformedRow, "checkpoint: bad number '" + token + "'");
        m(i, j) = *v;
      }
    }
    return m;
  };
  model.w1 = read_matrix("W1", d, h1);
  model.w2 = read_matrix("W2", h1, h2);
  model.w_out = read_matrix("W_out", h2, c);
  return model;
}

/// CSV with header `node_id,<prefix>0,...`; used for embeddings (z_) and other point sets.
inline void write_points_csv(std::ostream& out, const Matrix& points, const std::vector<std::string>& column_names) {
  out << "node_id";
  for (const auto& c : column_names) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < points.cols(); ++j) out << ',' << csv::format_double(points(i, j));
    out << '\n';
  }
}

inline void write_embeddings_csv(std::ostream& out, const Matrix& embeddings) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) names.push_back("z_" + std::to_string(j));
  write_points_csv(out, embeddings, names);
}

/// Reads any `node_id,...` numeric table back into a matrix; node ids must be 0..n-1 in order.
inline Matrix read_points_csv(std::istream& in, std::string_view source = "points") {
  auto lines = csv::read_lines(in);
  if (lines.empty() || !csv::trim(lines.front().text).starts_with("node_id")) {
    fail(ErrorCode::MalformedRow, std::string(source) + ":1: expected header starting with node_id");
  }
  const std::size_t cols = csv::split(lines.front().text).size() - 1;
  Matrix m(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = csv::split(lines[i].text);
    const std::string where = csv::where(source, lines[i].line_number);
    if (fields.size() != cols + 1) fail(ErrorCode::MalformedRow, where + ": wrong column count");
    const auto id = csv::parse_number<std::size_t>(fields[0]);
    if (!id || *id != i - 1) fail(ErrorCode::MalformedRow, where + ": node ids must be 0..n-1 in order");
    for (std::size_t j = 0; j < cols; ++j) {
      const auto v = csv::parse_number<double>(fields[j + 1]);
      if (!v) fail(ErrorCode::MalformedRow, where + ": non-numeric value");
      m(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  return m;
}

}  // namespace siot
