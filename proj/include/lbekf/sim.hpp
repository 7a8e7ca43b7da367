#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lbekf/banded.hpp"
#include "lbekf/error.hpp"
#include "lbekf/filter.hpp"
#include "lbekf/graph.hpp"
#include "lbekf/model.hpp"
#include "lbekf/rng.hpp"

namespace lbekf {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
// processed exactly once; the first exception is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Banded inversion error experiment

struct Fig2Config {
  std::size_t n = 500;
  std::vector<std::size_t> input_bandwidths{5, 10, 25};
  std::vector<std::size_t> band_values = [] {
    std::vector<std::size_t> v(51);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
  }();
  std::size_t trials = 1;
  std::uint64_t seed = 20230101;
  double diagonal = 15.0;
};

struct Fig2Row {
  std::size_t input_bw;
  std::size_t band;
  std::size_t trial;
  double error;
};

// Symmetric matrix with off-diagonal entries uniform in (-1, 1) inside the
// requested bandwidth, zero outside, constant diagonal; then divided by the
// diagonal value so the diagonal is 1.
inline DenseSymMatrix fig2_matrix(std::size_t n, std::size_t bw, double diagonal, Rng& gen) {
  DenseSymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.set(i, i, 1.0);
    for (std::size_t j = (i > bw ? i - bw : 0); j < i; ++j) a.set(i, j, gen.uniform(-1.0, 1.0) / diagonal);
  }
  return a;
}

inline std::vector<Fig2Row> run_fig2(const Fig2Config& cfg, std::size_t jobs = 1) {
  if (cfg.n < 2) throw Error(Errc::invalid_argument, "run_fig2: n must be >= 2");
  if (cfg.trials < 1) throw Error(Errc::invalid_argument, "run_fig2: trials must be >= 1");
  for (std::size_t L : cfg.band_values)
    if (L > cfg.n - 1) throw Error(Errc::invalid_argument, "run_fig2: L=" + std::to_string(L) + " exceeds n-1");
  for (std::size_t b : cfg.input_bandwidths)
    if (b > cfg.n - 1) throw Error(Errc::invalid_argument, "run_fig2: input bandwidth exceeds n-1");

  const std::size_t n_bw = cfg.input_bandwidths.size();
  const std::size_t n_l = cfg.band_values.size();
  std::vector<Fig2Row> rows(n_bw * cfg.trials * n_l);
  parallel_for(n_bw * cfg.trials, jobs, [&](std::size_t job) {
    const std::size_t bi = job / cfg.trials;
    const std::size_t trial = job % cfg.trials;
    const std::size_t bw = cfg.input_bandwidths[bi];
    Rng gen = Rng(cfg.seed).split(bw).split(trial);
    const DenseSymMatrix a = fig2_matrix(cfg.n, bw, cfg.diagonal, gen);
    const DenseSymMatrix exact = dense_inverse(a);
    for (std::size_t li = 0; li < n_l; ++li) {
      const std::size_t L = cfg.band_values[li];
      rows[job * n_l + li] = {bw, L, trial, frobenius_error(l_banded_inverse(a, L), exact)};
    }
  });
  return rows;
}

inline double fig2_mean_error(const std::vector<Fig2Row>& rows, std::size_t input_bw, std::size_t band) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : rows)
    if (r.input_bw == input_bw && r.band == band) {
      sum += r.error;
      ++count;
    }
  if (count == 0) throw Error(Errc::invalid_argument, "fig2_mean_error: no rows for requested (bw, L)");
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Localization Monte Carlo

enum class Algorithm { ekf, lbekf_vr, lbekf_novr };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ekf: return "ekf";
    case Algorithm::lbekf_vr: return "lbekf+vr";
    case Algorithm::lbekf_novr: return "lbekf-vr";
  }
  return "?";
}

enum class AgentSource { uniform, rgg, file };
enum class Motion { stationary, constant_velocity };

struct ScenarioConfig {
  double side = 40.0;
  AgentSource source = AgentSource::uniform;
  std::size_t n_agents = 30;              // AgentSource::uniform
  double rate = 0.05;                     // AgentSource::rgg
  std::optional<Realization> positions;   // AgentSource::file; radius taken from `radius`
  std::size_t n_beacons = 8;
  double radius = 15.0;
  NoiseParams noise{};
  double init_var = 5.0;
  std::size_t band = 20;
  std::size_t timesteps = 100;
  std::size_t trials = 200;
  Motion motion = Motion::stationary;
  double speed = 0.1;                     // per-step velocity bound for constant_velocity (m)
  std::vector<Algorithm> algorithms{Algorithm::ekf, Algorithm::lbekf_vr, Algorithm::lbekf_novr};
  std::uint64_t seed = 20230101;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(Errc::invalid_argument, "ScenarioConfig: " + m); };
    if (trials < 1) bad("trials must be >= 1");
    if (timesteps < 1) bad("timesteps must be >= 1");
    if (!(noise.sigma_p >= 0.0) || !(noise.sigma_q > 0.0) || !(noise.sigma_r > 0.0) || !(init_var > 0.0))
      bad("variances must be positive (sigma_p may be 0)");
    if (!(side > 0.0) || !(radius > 0.0)) bad("side and radius must be > 0");
    if (n_beacons < 1) bad("need at least one beacon");
    if (algorithms.empty()) bad("no algorithm selected");
    if (source == AgentSource::file && !positions) bad("file source without positions");
    if (source == AgentSource::uniform && n_agents < n_beacons) bad("fewer agents than beacons");
    if (source == AgentSource::rgg && !(rate > 0.0)) bad("rate must be > 0");
  }
};

// Per-trial scenario facts, independent of the filters.
struct ScenarioInfo {
  std::size_t n_agents = 0;
  std::size_t n_edges = 0;
  std::size_t bandwidth_original = 0;
  std::size_t bandwidth_relabeled = 0;
  std::size_t phi_max = 0;
  bool observable = false;
  std::vector<std::size_t> beacons;
};

// One filter run. Agent indices are always the scenario's original labels.
struct TrialRecord {
  Algorithm algorithm = Algorithm::ekf;
  std::size_t trial = 0;
  std::size_t n_agents = 0;
  std::size_t dim = 2;
  std::vector<double> agent_mse;  // (timesteps + 1) x n_agents, timestep-major; row 0 is the initial error
  std::vector<double> total_mse;  // timesteps + 1
  std::vector<double> final_xhat;
  std::vector<double> final_blocks;  // n_agents blocks of dim x dim, row-major
  bool diverged = false;
  std::size_t diverged_at = 0;

  std::size_t n_timesteps() const { return total_mse.size(); }
  double mse(std::size_t k, std::size_t agent) const { return agent_mse[k * n_agents + agent]; }
};

struct LocalizationResult {
  std::vector<Algorithm> algorithms;
  std::vector<std::vector<TrialRecord>> records;  // [algorithm][trial]
  std::vector<ScenarioInfo> scenarios;            // [trial]
  std::vector<std::string> warnings;

  const std::vector<TrialRecord>& of(Algorithm a) const {
    for (std::size_t i = 0; i < algorithms.size(); ++i)
      if (algorithms[i] == a) return records[i];
    throw Error(Errc::invalid_argument, std::string("LocalizationResult: algorithm not run: ") + to_string(a));
  }
};

// Greedy farthest-point selection: a random first beacon, then repeatedly the
// agent whose distance to the nearest chosen beacon is largest (lowest label on ties).
inline std::vector<std::size_t> select_beacons(const Realization& x, std::size_t count, Rng& gen) {
  const std::size_t n = x.size();
  if (count > n) throw Error(Errc::invalid_argument, "select_beacons: more beacons than agents");
  std::vector<std::size_t> chosen;
  if (count == 0) return chosen;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = gen.index(n);
  while (true) {
    chosen.push_back(pick);
    if (chosen.size() == count) break;
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(x.position(i), x.position(pick)));
    pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (nearest[i] > best) {
        best = nearest[i];
        pick = i;
      }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// For a model relabeled by p, index map from each of its measurement rows to
// the row of the original model carrying the same physical measurement.
inline std::vector<std::size_t> measurement_row_map(const WsnModel& original, const WsnModel& relabeled,
                                                    const Permutation& p) {
  const Permutation inv = p.inverse();
  const std::size_t d = original.dim();
  std::vector<std::size_t> map;
  map.reserve(relabeled.measurement_size());
  const auto& ob = original.beacons();
  for (std::size_t b : relabeled.beacons()) {
    const auto it = std::lower_bound(ob.begin(), ob.end(), inv[b]);
    const std::size_t pos = static_cast<std::size_t>(it - ob.begin());
    for (std::size_t c = 0; c < d; ++c) map.push_back(pos * d + c);
  }
  const auto& oe = original.graph().edges();
  const std::size_t base = d * ob.size();
  for (auto [i, j] : relabeled.graph().edges()) {
    Edge e{inv[i], inv[j]};
    if (e.first > e.second) std::swap(e.first, e.second);
    const auto it = std::lower_bound(oe.begin(), oe.end(), e);
    map.push_back(base + static_cast<std::size_t>(it - oe.begin()));
  }
  return map;
}

namespace detail {

struct FilterLane {
  Algorithm algorithm;
  const WsnModel* model;
  const Permutation* labels;  // original label -> filter label
  const std::vector<std::size_t>* row_map;  // null when the filter uses the original rows
  FilterState state;
  TrialRecord record;
  bool alive = true;
};

inline void record_errors(FilterLane& lane, std::size_t k, std::span<const double> truth, std::size_t d) {
  auto& rec = lane.record;
  double total = 0.0;
  for (std::size_t i = 0; i < rec.n_agents; ++i) {
    const std::size_t fi = (*lane.labels)[i];
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double e = truth[i * d + c] - lane.state.xhat[fi * d + c];
      s += e * e;
    }
    rec.agent_mse[k * rec.n_agents + i] = s;
    total += s;
  }
  rec.total_mse[k] = total;
}

inline void record_final(FilterLane& lane, std::size_t d) {
  auto& rec = lane.record;
  rec.final_xhat.assign(rec.n_agents * d, 0.0);
  rec.final_blocks.assign(rec.n_agents * d * d, 0.0);
  for (std::size_t i = 0; i < rec.n_agents; ++i) {
    const std::size_t fi = (*lane.labels)[i];
    for (std::size_t a = 0; a < d; ++a) {
      rec.final_xhat[i * d + a] = lane.state.xhat[fi * d + a];
      for (std::size_t b = 0; b < d; ++b) rec.final_blocks[(i * d + a) * d + b] = lane.state.m(fi * d + a, fi * d + b);
    }
  }
}

}  // namespace detail

inline Realization scenario_positions(const ScenarioConfig& cfg, Rng& gen) {
  switch (cfg.source) {
    case AgentSource::file:
      return Realization(cfg.positions->dim(), cfg.positions->coords(), cfg.radius);
    case AgentSource::rgg: {
      RggConfig rgg{{cfg.side, cfg.side}, cfg.rate, cfg.radius, 0};
      return sample_rgg(rgg, gen).second;
    }
    case AgentSource::uniform:
    default: {
      std::vector<double> coords(cfg.n_agents * 2);
      for (double& c : coords) c = gen.uniform(0.0, cfg.side);
      return Realization(2, std::move(coords), cfg.radius);
    }
  }
}

// Runs one Monte Carlo trial: every selected filter sees the same truth,
// initial estimate and measurements.
inline void run_trial(const ScenarioConfig& cfg, std::size_t trial, std::vector<TrialRecord>& out,
                      ScenarioInfo& info) {
  const Rng root = Rng(cfg.seed).split(trial);
  Rng pos_gen = root.split(0), beacon_gen = root.split(1), init_gen = root.split(2);
  Rng truth_gen = root.split(3), meas_gen = root.split(4), motion_gen = root.split(5);

  const Realization x0 = scenario_positions(cfg, pos_gen);
  const std::size_t n = x0.size();
  const std::size_t d = x0.dim();
  if (n < cfg.n_beacons)
    throw Error(Errc::invalid_argument, "trial " + std::to_string(trial) + ": " + std::to_string(n) +
                                            " agents but " + std::to_string(cfg.n_beacons) + " beacons");
  const WsnGraph graph = build_geometric_graph(x0);
  const WsnModel model(d, graph, select_beacons(x0, cfg.n_beacons, beacon_gen), cfg.noise);

  const Permutation identity = Permutation::identity(n);
  const Permutation vr = vertex_relabel(x0);
  std::vector<std::size_t> vr_beacons;
  for (std::size_t b : model.beacons()) vr_beacons.push_back(vr[b]);
  const WsnModel vr_model(d, permute_graph(graph, vr), vr_beacons, cfg.noise);
  const std::vector<std::size_t> vr_rows = measurement_row_map(model, vr_model, vr);

  info.n_agents = n;
  info.n_edges = graph.edges().size();
  info.bandwidth_original = graph_bandwidth(graph);
  info.bandwidth_relabeled = graph_bandwidth(vr_model.graph());
  info.phi_max = phi_max(x0);
  info.beacons = model.beacons();

  std::vector<double> truth = x0.coords();
  std::vector<double> xhat0(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) xhat0[i] = truth[i] + init_gen.gaussian(cfg.init_var);
  info.observable = observability_rank_check(truth, model).full;

  const std::size_t full_band = n * d - 1;
  std::vector<detail::FilterLane> lanes;
  for (Algorithm a : cfg.algorithms) {
    const bool relabel = a == Algorithm::lbekf_vr;
    const WsnModel* m = relabel ? &vr_model : &model;
    const Permutation* labels = relabel ? &vr : &identity;
    std::vector<double> x_init(xhat0.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) x_init[(*labels)[i] * d + c] = xhat0[i * d + c];
    const std::size_t band = a == Algorithm::ekf ? full_band : std::min(cfg.band, full_band);
    TrialRecord rec;
    rec.algorithm = a;
    rec.trial = trial;
    rec.n_agents = n;
    rec.dim = d;
    rec.agent_mse.assign((cfg.timesteps + 1) * n, 0.0);
    rec.total_mse.assign(cfg.timesteps + 1, 0.0);
    lanes.push_back({a, m, labels, relabel ? &vr_rows : nullptr, init_filter(std::move(x_init), cfg.init_var, band),
                     std::move(rec)});
  }
  for (auto& lane : lanes) detail::record_errors(lane, 0, truth, d);

  std::vector<double> velocity(truth.size(), 0.0);
  if (cfg.motion == Motion::constant_velocity)
    for (double& v : velocity) v = motion_gen.uniform(-cfg.speed, cfg.speed);

  for (std::size_t k = 0; k < cfg.timesteps; ++k) {
    const MeasurementBatch y = measure(truth, model, meas_gen);
    for (auto& lane : lanes) {
      if (!lane.alive) continue;
      MeasurementBatch y_lane;
      std::vector<double> v_lane(velocity.size());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) v_lane[(*lane.labels)[i] * d + c] = velocity[i * d + c];
      if (lane.row_map) {
        y_lane.y.resize(y.y.size());
        for (std::size_t r = 0; r < y.y.size(); ++r) y_lane.y[r] = y.y[(*lane.row_map)[r]];
      }
      try {
        lane.state = lb_ekf_step(lane.state, *lane.model, v_lane, lane.row_map ? y_lane : y);
      } catch (const DivergenceError& e) {
        lane.alive = false;
        lane.record.diverged = true;
        lane.record.diverged_at = e.timestep();
      }
    }
    truth = simulate_step(truth, velocity, model, truth_gen);
    for (auto& lane : lanes)
      if (lane.alive) detail::record_errors(lane, k + 1, truth, d);
  }
  out.clear();
  for (auto& lane : lanes) {
    if (lane.alive) detail::record_final(lane, d);
    out.push_back(std::move(lane.record));
  }
}

inline LocalizationResult run_localization(const ScenarioConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  std::vector<std::vector<TrialRecord>> per_trial(cfg.trials);
  LocalizationResult result;
  result.algorithms = cfg.algorithms;
  result.scenarios.resize(cfg.trials);
  parallel_for(cfg.trials, jobs, [&](std::size_t t) { run_trial(cfg, t, per_trial[t], result.scenarios[t]); });
  result.records.resize(cfg.algorithms.size());
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a)
    for (std::size_t t = 0; t < cfg.trials; ++t) result.records[a].push_back(std::move(per_trial[t][a]));
  std::size_t unobservable = 0;
  for (const auto& s : result.scenarios) unobservable += s.observable ? 0 : 1;
  if (unobservable > 0)
    result.warnings.push_back(std::to_string(unobservable) +
                              " trial(s) failed the observability rank check at the initial positions");
  if (cfg.n_beacons < 2) result.warnings.emplace_back("fewer than 2 beacons: 2-D distance localization is not observable");
  return result;
}

struct MseCurves {
  std::size_t n_trials = 0;    // non-diverged trials averaged
  std::size_t n_diverged = 0;
  std::size_t n_agents = 0;
  std::vector<double> agent_mean;  // timestep-major, like TrialRecord::agent_mse
  std::vector<double> total_mean;

  double agent(std::size_t k, std::size_t i) const { return agent_mean[k * n_agents + i]; }
};

// Trial averages over non-diverged records; diverged ones are only counted.
inline MseCurves mse_curves(const std::vector<TrialRecord>& records) {
  MseCurves c;
  for (const auto& r : records) {
    if (r.diverged) {
      ++c.n_diverged;
      continue;
    }
    if (c.n_trials == 0) {
      c.n_agents = r.n_agents;
      c.agent_mean.assign(r.agent_mse.size(), 0.0);
      c.total_mean.assign(r.total_mse.size(), 0.0);
    } else if (r.agent_mse.size() != c.agent_mean.size()) {
      throw Error(Errc::dimension_mismatch, "mse_curves: records have different shapes");
    }
    for (std::size_t i = 0; i < r.agent_mse.size(); ++i) c.agent_mean[i] += r.agent_mse[i];
    for (std::size_t i = 0; i < r.total_mse.size(); ++i) c.total_mean[i] += r.total_mse[i];
    ++c.n_trials;
  }
  if (c.n_trials == 0) throw Error(Errc::all_diverged, "mse_curves: every trial diverged");
  const double inv = 1.0 / static_cast<double>(c.n_trials);
  for (double& v : c.agent_mean) v *= inv;
  for (double& v : c.total_mean) v *= inv;
  return c;
}

// Mean of the trial-averaged total MSE over the last `window` timesteps.
inline double steady_state_total(const MseCurves& c, std::size_t window) {
  window = std::min(window, c.total_mean.size());
  double s = 0.0;
  for (std::size_t k = c.total_mean.size() - window; k < c.total_mean.size(); ++k) s += c.total_mean[k];
  return s / static_cast<double>(window);
}

struct EllipseRow {
  std::size_t agent;
  double cx, cy;
  double m11, m12, m22;
  double level;
};

inline constexpr double kEllipseLevel = 20.0;

// Level set (x - c)^T B^{-1} (x - c) <= level of each agent's 2x2 covariance block.
inline std::vector<EllipseRow> export_ellipses(const FilterState& state, std::size_t dim,
                                               double level = kEllipseLevel) {
  if (dim != 2) throw Error(Errc::invalid_argument, "export_ellipses: only 2-D states are supported");
  std::vector<EllipseRow> rows;
  for (std::size_t i = 0; i < state.xhat.size() / 2; ++i) {
    const DenseSymMatrix b = covariance_block(state, i, 2);
    rows.push_back({i, state.xhat[2 * i], state.xhat[2 * i + 1], b(0, 0), b(0, 1), b(1, 1), level});
  }
  return rows;
}

inline std::vector<EllipseRow> export_ellipses(const TrialRecord& rec, double level = kEllipseLevel) {
  if (rec.dim != 2) throw Error(Errc::invalid_argument, "export_ellipses: only 2-D states are supported");
  std::vector<EllipseRow> rows;
  if (rec.diverged) return rows;
  for (std::size_t i = 0; i < rec.n_agents; ++i) {
    const double* b = &rec.final_blocks[i * 4];
    rows.push_back({i, rec.final_xhat[2 * i], rec.final_xhat[2 * i + 1], b[0], b[1], b[3], level});
  }
  return rows;
}

// Semi-axis lengths (major, minor) of an exported ellipse.
inline std::pair<double, double> ellipse_semi_axes(const EllipseRow& e) {
  const double mean = 0.5 * (e.m11 + e.m22);
  const double diff = 0.5 * (e.m11 - e.m22);
  const double rad = std::sqrt(diff * diff + e.m12 * e.m12);
  const double big = mean + rad;
  const double small = std::max(0.0, mean - rad);
  return {std::sqrt(e.level * big), std::sqrt(e.level * small)};
}

// ---------------------------------------------------------------------------
// Scan statistic of the x-projected Poisson process

struct ScanConfig {
  std::vector<double> lambdas{0.005, 0.01, 0.02, 0.05, 0.1};
  std::vector<double> sides{40.0};
  double radius = 15.0;
  std::size_t trials = 500;
  std::uint64_t seed = 20230101;
};

struct ScanRecord {
  double lambda;
  double side;
  std::size_t n_vertices;
  std::size_t phi_max;
  std::uint64_t seed;
};

// Draws N ~ Po(lambda * side^2) x-coordinates uniform on [0, side] and returns
// them sorted.
inline std::vector<double> sample_strip_coordinates(double lambda, double side, Rng& gen) {
  const std::size_t count = static_cast<std::size_t>(gen.poisson(lambda * side * side));
  std::vector<double> xs(count);
  for (double& v : xs) v = gen.uniform(0.0, side);
  std::sort(xs.begin(), xs.end());
  return xs;
}

// Number of sorted values in the closed window [a, a + width].
inline std::size_t count_in_window(std::span<const double> sorted, double a, double width) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), a);
  const auto hi = std::upper_bound(sorted.begin(), sorted.end(), a + width);
  return static_cast<std::size_t>(hi - lo);
}

inline std::vector<ScanRecord> run_scan(const ScanConfig& cfg) {
  if (!(cfg.radius > 0.0)) throw Error(Errc::invalid_argument, "run_scan: radius must be > 0");
  if (cfg.trials < 1) throw Error(Errc::invalid_argument, "run_scan: trials must be >= 1");
  for (double l : cfg.lambdas)
    if (!(l > 0.0)) throw Error(Errc::invalid_argument, "run_scan: rates must be > 0");
  for (double s : cfg.sides)
    if (!(s > 0.0)) throw Error(Errc::invalid_argument, "run_scan: sides must be > 0");
  std::vector<ScanRecord> out;
  out.reserve(cfg.lambdas.size() * cfg.sides.size() * cfg.trials);
  std::uint64_t group = 0;
  for (double lambda : cfg.lambdas)
    for (double side : cfg.sides) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, group), t);
        Rng gen(seed);
        const auto xs = sample_strip_coordinates(lambda, side, gen);
        out.push_back({lambda, side, xs.size(), max_window_count(xs, cfg.radius), seed});
      }
      ++group;
    }
  return out;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_argument, "loglog_slope: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace lbekf
