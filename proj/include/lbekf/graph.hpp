#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lbekf/banded.hpp"
#include "lbekf/error.hpp"
#include "lbekf/rng.hpp"

namespace lbekf {

// Ordered agent positions in R^d plus the sensing radius. The order of the
// positions is the vertex labeling.
class Realization {
 public:
  Realization() = default;
  Realization(std::size_t dim, std::vector<double> coords, double radius)
      : dim_(dim), coords_(std::move(coords)), radius_(radius) {
    if (dim_ < 1 || dim_ > 3) throw Error(Errc::invalid_argument, "Realization: dimension must be 1, 2 or 3");
    if (coords_.size() % dim_ != 0)
      throw Error(Errc::dimension_mismatch, "Realization: coordinate count not a multiple of dimension");
    if (!(radius_ > 0.0) || !std::isfinite(radius_))
      throw Error(Errc::invalid_argument, "Realization: sensing radius must be finite and > 0");
    for (double c : coords_)
      if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "Realization: non-finite coordinate");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  double radius() const noexcept { return radius_; }
  std::span<const double> position(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  // Flattened coordinates, agent-major; this is the stacked state vector x.
  const std::vector<double>& coords() const noexcept { return coords_; }

  friend bool operator==(const Realization&, const Realization&) = default;

 private:
  std::size_t dim_ = 2;
  std::vector<double> coords_;
  double radius_ = 1.0;
};

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected simple graph. Edges are stored as (min, max) pairs in
// lexicographic order; that order is also the measurement row order.
class WsnGraph {
 public:
  WsnGraph() = default;
  WsnGraph(std::size_t n_vertices, std::vector<Edge> edges) : n_(n_vertices), edges_(std::move(edges)) {
    for (auto& e : edges_) {
      if (e.first == e.second) throw Error(Errc::invalid_argument, "WsnGraph: self-loop");
      if (e.first >= n_ || e.second >= n_) throw Error(Errc::index_out_of_range, "WsnGraph: edge endpoint out of range");
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw Error(Errc::invalid_argument, "WsnGraph: duplicate edge");
  }

  std::size_t n_vertices() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::vector<std::vector<std::size_t>> neighbors() const {
    std::vector<std::vector<std::size_t>> nb(n_);
    for (auto [i, j] : edges_) {
      nb[i].push_back(j);
      nb[j].push_back(i);
    }
    return nb;
  }

  friend bool operator==(const WsnGraph&, const WsnGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

// map[i] is the new label of old vertex i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
      if (v >= map_.size() || seen[v]) throw Error(Errc::invalid_argument, "Permutation: not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
  }

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t operator[](std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& map() const noexcept { return map_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

struct RggConfig {
  std::vector<double> side_lengths{40.0, 40.0};  // D = [0, s_1] x ... x [0, s_d]
  double rate = 0.05;                            // agents per unit volume
  double radius = 15.0;
  std::uint64_t seed = 1;

  double volume() const {
    double v = 1.0;
    for (double s : side_lengths) v *= s;
    return v;
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

// Edge (i, j) iff ||x_i - x_j|| <= r (closed ball). Sweeps the points in
// x-order so only pairs within r along x are compared.
inline WsnGraph build_geometric_graph(const Realization& x) {
  const std::size_t n = x.size();
  const double r = x.radius();
  const double r2 = r * r;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x.position(a)[0] < x.position(b)[0]; });
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    const auto pa = x.position(order[a]);
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto pb = x.position(order[b]);
      if (pb[0] - pa[0] > r) break;
      if (squared_distance(pa, pb) <= r2) edges.emplace_back(order[a], order[b]);
    }
  }
  return WsnGraph(n, std::move(edges));
}

inline DenseSymMatrix laplacian(const WsnGraph& g) {
  DenseSymMatrix lap(g.n_vertices());
  for (auto [i, j] : g.edges()) {
    lap.add(i, i, 1.0);
    lap.add(j, j, 1.0);
    lap.set(i, j, -1.0);
  }
  return lap;
}

inline std::size_t graph_bandwidth(const WsnGraph& g) {
  std::size_t bw = 0;
  for (auto [i, j] : g.edges()) bw = std::max(bw, j - i);
  return bw;
}

// Bandwidth the graph would have after relabeling by p, without building it.
inline std::size_t relabeled_bandwidth(const WsnGraph& g, const Permutation& p) {
  std::size_t bw = 0;
  for (auto [i, j] : g.edges()) {
    const std::size_t a = p[i], b = p[j];
    bw = std::max(bw, a > b ? a - b : b - a);
  }
  return bw;
}

// Lexicographic coordinate sort (x, then y, then z); remaining ties keep the
// original order.
inline Permutation vertex_relabel(const Realization& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = x.position(a);
    const auto pb = x.position(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  std::vector<std::size_t> map(n);
  for (std::size_t k = 0; k < n; ++k) map[order[k]] = k;
  return Permutation(std::move(map));
}

inline Realization permute_realization(const Realization& x, const Permutation& p) {
  if (p.size() != x.size()) throw Error(Errc::dimension_mismatch, "permute_realization: permutation size differs");
  std::vector<double> coords(x.coords().size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto src = x.position(i);
    std::copy(src.begin(), src.end(), coords.begin() + static_cast<std::ptrdiff_t>(p[i] * x.dim()));
  }
  return Realization(x.dim(), std::move(coords), x.radius());
}

inline WsnGraph permute_graph(const WsnGraph& g, const Permutation& p) {
  if (p.size() != g.n_vertices()) throw Error(Errc::dimension_mismatch, "permute_graph: permutation size differs");
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (auto [i, j] : g.edges()) edges.emplace_back(p[i], p[j]);
  return WsnGraph(g.n_vertices(), std::move(edges));
}

inline std::pair<WsnGraph, Realization> apply_permutation(const WsnGraph& g, const Realization& x,
                                                          const Permutation& p) {
  if (g.n_vertices() != x.size())
    throw Error(Errc::dimension_mismatch, "apply_permutation: graph and realization sizes differ");
  return {permute_graph(g, p), permute_realization(x, p)};
}

inline std::size_t phi_of_relabeling(const Realization& x) {
  return relabeled_bandwidth(build_geometric_graph(x), vertex_relabel(x));
}

namespace detail {
inline std::vector<double> sorted_x(const Realization& x) {
  std::vector<double> xs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x.position(i)[0];
  std::sort(xs.begin(), xs.end());
  return xs;
}
}  // namespace detail

// Largest count of sorted values inside a closed window [a, a + width]; the
// window is anchored at each value in turn.
inline std::size_t max_window_count(std::span<const double> sorted, double width) {
  std::size_t best = 0;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < sorted.size(); ++lo) {
    hi = std::max(hi, lo);
    while (hi < sorted.size() && sorted[hi] <= sorted[lo] + width) ++hi;
    best = std::max(best, hi - lo);
  }
  return best;
}

inline std::size_t phi_max(const Realization& x) {
  const auto xs = detail::sorted_x(x);
  return max_window_count(xs, x.radius());
}

struct StripCount {
  double window_start;
  std::size_t count;
  friend bool operator==(const StripCount&, const StripCount&) = default;
};

// |X ∩ [a, a + r] x R^{d-1}| for every point's x-coordinate a, in sorted order.
inline std::vector<StripCount> strip_count_process(const Realization& x) {
  const auto xs = detail::sorted_x(x);
  std::vector<StripCount> out;
  out.reserve(xs.size());
  for (double a : xs) {
    const auto lo = std::lower_bound(xs.begin(), xs.end(), a);
    const auto hi = std::upper_bound(xs.begin(), xs.end(), a + x.radius());
    out.push_back({a, static_cast<std::size_t>(hi - lo)});
  }
  return out;
}

// |V| minus the graph diameter (all-sources BFS).
inline std::size_t diameter_bound(const WsnGraph& g) {
  const std::size_t n = g.n_vertices();
  if (n == 0) return 0;
  const auto nb = g.neighbors();
  std::size_t diameter = 0;
  std::vector<std::size_t> dist(n);
  std::deque<std::size_t> queue;
  constexpr std::size_t unseen = static_cast<std::size_t>(-1);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), unseen);
    dist[s] = 0;
    queue.assign(1, s);
    std::size_t reached = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : nb[u])
        if (dist[v] == unseen) {
          dist[v] = dist[u] + 1;
          diameter = std::max(diameter, dist[v]);
          ++reached;
          queue.push_back(v);
        }
    }
    if (reached != n) throw Error(Errc::disconnected_graph, "diameter_bound: graph is not connected");
  }
  return n - diameter;
}

inline constexpr std::size_t kBruteForceMaxVertices = 9;

// Exact minimal bandwidth by exhaustive search over all labelings.
inline std::size_t min_bandwidth_bruteforce(const WsnGraph& g) {
  const std::size_t n = g.n_vertices();
  if (n > kBruteForceMaxVertices)
    throw Error(Errc::too_large, "min_bandwidth_bruteforce: n=" + std::to_string(n) + " exceeds " +
                                     std::to_string(kBruteForceMaxVertices));
  if (g.edges().empty()) return 0;
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  std::size_t best = n - 1;
  do {
    std::size_t bw = 0;
    for (auto [i, j] : g.edges()) {
      const std::size_t a = labels[i], b = labels[j];
      bw = std::max(bw, a > b ? a - b : b - a);
      if (bw >= best) break;
    }
    best = std::min(best, bw);
  } while (best > 1 && std::next_permutation(labels.begin(), labels.end()));
  return best;
}

// Homogeneous Poisson point process on a box, then the geometric graph.
inline std::pair<WsnGraph, Realization> sample_rgg(const RggConfig& cfg, Rng& gen) {
  const std::size_t d = cfg.side_lengths.size();
  if (d < 1 || d > 3) throw Error(Errc::invalid_argument, "sample_rgg: dimension must be 1, 2 or 3");
  for (double s : cfg.side_lengths)
    if (!(s > 0.0)) throw Error(Errc::invalid_argument, "sample_rgg: domain extents must be > 0");
  if (!(cfg.rate > 0.0)) throw Error(Errc::invalid_argument, "sample_rgg: rate must be > 0");
  const std::size_t count = static_cast<std::size_t>(gen.poisson(cfg.rate * cfg.volume()));
  std::vector<double> coords(count * d);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < d; ++c) coords[i * d + c] = gen.uniform(0.0, cfg.side_lengths[c]);
  Realization x(d, std::move(coords), cfg.radius);
  WsnGraph g = build_geometric_graph(x);
  return {std::move(g), std::move(x)};
}

inline std::pair<WsnGraph, Realization> sample_rgg(const RggConfig& cfg) {
  Rng gen(cfg.seed);
  return sample_rgg(cfg, gen);
}

}  // namespace lbekf
