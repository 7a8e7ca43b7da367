#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lbekf/banded.hpp"
#include "lbekf/error.hpp"
#include "lbekf/graph.hpp"
#include "lbekf/rng.hpp"

namespace lbekf {

// Pairwise measurement kinds. Only distance is implemented; a new kind needs
// its phi and d(phi)/d(x_i) in pair_value() / pair_gradient().
enum class MeasurementKind { distance };

struct NoiseParams {
  double sigma_p = 0.02;  // process noise variance per coordinate (m^2)
  double sigma_q = 2.0;   // beacon self-position noise variance (m^2)
  double sigma_r = 10.0;  // pairwise measurement noise variance (m^2 for distance)
};

// Motion and measurement model of a WSN: graph, beacon set, noise variances.
// Measurement stacking is beacons first (in ascending label order, d entries
// each) followed by one block of m entries per edge in the graph's edge order.
class WsnModel {
 public:
  WsnModel(std::size_t dim, WsnGraph graph, std::vector<std::size_t> beacons, NoiseParams noise,
           MeasurementKind kind = MeasurementKind::distance)
      : dim_(dim), graph_(std::move(graph)), beacons_(std::move(beacons)), noise_(noise), kind_(kind) {
    if (dim_ < 1 || dim_ > 3) throw Error(Errc::invalid_argument, "WsnModel: dimension must be 1, 2 or 3");
    if (beacons_.empty()) throw Error(Errc::invalid_argument, "WsnModel: beacon set must be nonempty");
    std::sort(beacons_.begin(), beacons_.end());
    if (std::adjacent_find(beacons_.begin(), beacons_.end()) != beacons_.end())
      throw Error(Errc::invalid_argument, "WsnModel: duplicate beacon");
    if (beacons_.back() >= graph_.n_vertices())
      throw Error(Errc::index_out_of_range, "WsnModel: beacon label out of range");
    if (!(noise_.sigma_p >= 0.0) || !(noise_.sigma_q > 0.0) || !(noise_.sigma_r > 0.0))
      throw Error(Errc::invalid_argument, "WsnModel: need sigma_p >= 0, sigma_q > 0, sigma_r > 0");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t meas_dim() const noexcept { return 1; }
  std::size_t n_agents() const noexcept { return graph_.n_vertices(); }
  std::size_t state_dim() const noexcept { return dim_ * graph_.n_vertices(); }
  std::size_t measurement_size() const noexcept {
    return dim_ * beacons_.size() + meas_dim() * graph_.edges().size();
  }
  const WsnGraph& graph() const noexcept { return graph_; }
  const std::vector<std::size_t>& beacons() const noexcept { return beacons_; }
  const NoiseParams& noise() const noexcept { return noise_; }
  MeasurementKind kind() const noexcept { return kind_; }

  bool is_beacon(std::size_t agent) const {
    return std::binary_search(beacons_.begin(), beacons_.end(), agent);
  }

  // Non-fatal modelling problems, e.g. too few beacons for observability.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (dim_ == 2 && kind_ == MeasurementKind::distance && beacons_.size() < 2)
      w.emplace_back("2-D distance localization with fewer than 2 beacons is not observable");
    return w;
  }

 private:
  std::size_t dim_;
  WsnGraph graph_;
  std::vector<std::size_t> beacons_;
  NoiseParams noise_;
  MeasurementKind kind_;
};

struct MeasurementBatch {
  std::vector<double> y;
};

struct SparseEntry {
  std::size_t col;
  double value;
};

// Row-compressed Jacobian of the stacked measurement function.
class SparseJacobian {
 public:
  SparseJacobian(std::size_t n_rows, std::size_t n_cols) : n_rows_(n_rows), n_cols_(n_cols) {
    row_ptr_.reserve(n_rows + 1);
    row_ptr_.push_back(0);
  }

  void push_row(std::initializer_list<SparseEntry> entries) {
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    row_ptr_.push_back(entries_.size());
  }
  void push_row(std::span<const SparseEntry> entries) {
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    row_ptr_.push_back(entries_.size());
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::span<const SparseEntry> row(std::size_t i) const {
    return std::span<const SparseEntry>(entries_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  // Dense copy, row-major n_rows x n_cols.
  std::vector<double> to_dense() const {
    std::vector<double> out(n_rows_ * n_cols_, 0.0);
    for (std::size_t i = 0; i < n_rows_; ++i)
      for (const auto& e : row(i)) out[i * n_cols_ + e.col] += e.value;
    return out;
  }

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<SparseEntry> entries_;
};

namespace detail {

inline void check_state(std::span<const double> x, const WsnModel& model, const char* who) {
  if (x.size() != model.state_dim())
    throw Error(Errc::dimension_mismatch, std::string(who) + ": state length " + std::to_string(x.size()) +
                                              " != " + std::to_string(model.state_dim()));
}

inline double pair_value(std::span<const double> xi, std::span<const double> xj) {
  return std::sqrt(squared_distance(xi, xj));
}

}  // namespace detail

// x + v + p with p ~ N(0, sigma_p I).
inline std::vector<double> simulate_step(std::span<const double> x, std::span<const double> v,
                                         const WsnModel& model, Rng& gen) {
  detail::check_state(x, model, "simulate_step");
  detail::check_state(v, model, "simulate_step");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + v[i] + gen.gaussian(model.noise().sigma_p);
  return out;
}

struct Prediction {
  std::vector<double> values;
  // Edge indices whose endpoints coincide; their predicted distance is 0 and
  // the distance gradient is undefined there.
  std::vector<std::size_t> coincident_edges;
};

inline Prediction h_eval(std::span<const double> xhat, const WsnModel& model) {
  detail::check_state(xhat, model, "h_eval");
  const std::size_t d = model.dim();
  Prediction out;
  out.values.reserve(model.measurement_size());
  for (std::size_t b : model.beacons())
    for (std::size_t c = 0; c < d; ++c) out.values.push_back(xhat[b * d + c]);
  const auto& edges = model.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const double v = detail::pair_value(xhat.subspan(i * d, d), xhat.subspan(j * d, d));
    if (v == 0.0) out.coincident_edges.push_back(e);
    out.values.push_back(v);
  }
  return out;
}

// h(x) plus independent noise: variance sigma_q on beacon rows, sigma_r on edge rows.
inline MeasurementBatch measure(std::span<const double> x_true, const WsnModel& model, Rng& gen) {
  MeasurementBatch batch{h_eval(x_true, model).values};
  const std::size_t n_beacon_rows = model.dim() * model.beacons().size();
  for (std::size_t i = 0; i < batch.y.size(); ++i)
    batch.y[i] += gen.gaussian(i < n_beacon_rows ? model.noise().sigma_q : model.noise().sigma_r);
  return batch;
}

// Jacobian at xhat. Beacon rows are unit selectors; an edge row holds
// (x_i - x_j)^T / ||x_i - x_j|| on i's columns and its negation on j's.
inline SparseJacobian jacobian(std::span<const double> xhat, const WsnModel& model) {
  detail::check_state(xhat, model, "jacobian");
  const std::size_t d = model.dim();
  SparseJacobian h(model.measurement_size(), model.state_dim());
  for (std::size_t b : model.beacons())
    for (std::size_t c = 0; c < d; ++c) h.push_row({{b * d + c, 1.0}});
  std::vector<SparseEntry> row(2 * d);
  for (auto [i, j] : model.graph().edges()) {
    const auto xi = xhat.subspan(i * d, d);
    const auto xj = xhat.subspan(j * d, d);
    const double dist = detail::pair_value(xi, xj);
    if (!(dist > 0.0))
      throw Error(Errc::coincident_endpoints, "jacobian: agents " + std::to_string(i) + " and " +
                                                  std::to_string(j) + " have coincident estimates");
    for (std::size_t c = 0; c < d; ++c) {
      const double g = (xi[c] - xj[c]) / dist;
      row[c] = {i * d + c, g};
      row[d + c] = {j * d + c, -g};
    }
    h.push_row(std::span<const SparseEntry>(row));
  }
  return h;
}

// S = H^T R^{-1} H accumulated row by row. Stored bandwidth is
// d * (graph bandwidth + 1) - 1, the most a geometric-graph Jacobian can reach.
inline BandedSymMatrix information_matrix(const SparseJacobian& h, const WsnModel& model) {
  const std::size_t n = h.n_cols();
  const std::size_t d = model.dim();
  if (n != model.state_dim()) throw Error(Errc::dimension_mismatch, "information_matrix: Jacobian width");
  if (h.n_rows() != model.measurement_size())
    throw Error(Errc::dimension_mismatch, "information_matrix: Jacobian height");
  std::size_t span = d * (graph_bandwidth(model.graph()) + 1) - 1;
  for (std::size_t r = 0; r < h.n_rows(); ++r) {
    const auto row = h.row(r);
    if (row.empty()) continue;
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end(),
                                              [](const auto& a, const auto& b) { return a.col < b.col; });
    span = std::max(span, hi->col - lo->col);
  }
  BandedSymMatrix s(n, std::min(span, n - 1));
  const std::size_t n_beacon_rows = d * model.beacons().size();
  for (std::size_t r = 0; r < h.n_rows(); ++r) {
    const double w = 1.0 / (r < n_beacon_rows ? model.noise().sigma_q : model.noise().sigma_r);
    const auto row = h.row(r);
    for (std::size_t a = 0; a < row.size(); ++a)
      for (std::size_t b = 0; b < row.size(); ++b)
        if (row[a].col >= row[b].col) s.add(row[a].col, row[b].col, w * row[a].value * row[b].value);
  }
  return s;
}

// M H^T R^{-1} innovation, using H sparsely and M through its band.
inline std::vector<double> gain_apply(const BandedSymMatrix& m, const SparseJacobian& h, const WsnModel& model,
                                      std::span<const double> innovation) {
  if (innovation.size() != h.n_rows() || m.size() != h.n_cols() || h.n_rows() != model.measurement_size())
    throw Error(Errc::dimension_mismatch, "gain_apply: inconsistent dimensions");
  const std::size_t n_beacon_rows = model.dim() * model.beacons().size();
  std::vector<double> g(h.n_cols(), 0.0);
  for (std::size_t r = 0; r < h.n_rows(); ++r) {
    const double w = innovation[r] / (r < n_beacon_rows ? model.noise().sigma_q : model.noise().sigma_r);
    if (w == 0.0) continue;
    for (const auto& e : h.row(r)) g[e.col] += e.value * w;
  }
  return m.multiply(g);
}

// Numerical rank of a dense row-major matrix by Gaussian elimination with
// complete pivoting; pivots below max(rows, cols) * eps * |first pivot| count as zero.
inline std::size_t numerical_rank(std::vector<double> a, std::size_t rows, std::size_t cols) {
  std::size_t rank = 0;
  double tol = -1.0;
  for (std::size_t k = 0; k < std::min(rows, cols); ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < rows; ++i)
      for (std::size_t j = k; j < cols; ++j)
        if (std::abs(a[i * cols + j]) > best) {
          best = std::abs(a[i * cols + j]);
          pr = i;
          pc = j;
        }
    if (tol < 0.0) tol = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * best;
    if (best <= tol || best == 0.0) break;
    for (std::size_t j = 0; j < cols; ++j) std::swap(a[k * cols + j], a[pr * cols + j]);
    for (std::size_t i = 0; i < rows; ++i) std::swap(a[i * cols + k], a[i * cols + pc]);
    for (std::size_t i = k + 1; i < rows; ++i) {
      const double f = a[i * cols + k] / a[k * cols + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < cols; ++j) a[i * cols + j] -= f * a[k * cols + j];
    }
    ++rank;
  }
  return rank;
}

struct RankReport {
  std::size_t rank;
  bool full;
};

// Column rank of the measurement Jacobian at xhat. With identity dynamics this
// equals the rank of the stacked observability matrix. Edges with coincident
// endpoints contribute zero rows. Advisory only.
inline RankReport observability_rank_check(std::span<const double> xhat, const WsnModel& model) {
  detail::check_state(xhat, model, "observability_rank_check");
  const std::size_t d = model.dim();
  const std::size_t cols = model.state_dim();
  const std::size_t rows = model.measurement_size();
  std::vector<double> dense(rows * cols, 0.0);
  std::size_t r = 0;
  for (std::size_t b : model.beacons())
    for (std::size_t c = 0; c < d; ++c) dense[(r++) * cols + b * d + c] = 1.0;
  for (auto [i, j] : model.graph().edges()) {
    const auto xi = xhat.subspan(i * d, d);
    const auto xj = xhat.subspan(j * d, d);
    const double dist = detail::pair_value(xi, xj);
    if (dist > 0.0)
      for (std::size_t c = 0; c < d; ++c) {
        const double g = (xi[c] - xj[c]) / dist;
        dense[r * cols + i * d + c] = g;
        dense[r * cols + j * d + c] = -g;
      }
    ++r;
  }
  const std::size_t rank = numerical_rank(std::move(dense), rows, cols);
  return {rank, rank == cols};
}

}  // namespace lbekf
