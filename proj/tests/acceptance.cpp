// Standalone acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lbekf/filter.hpp"
#include "lbekf/graph.hpp"
#include "lbekf/sim.hpp"
#include "oracle.hpp"

#ifndef LBEKF_CLI_PATH
#error "LBEKF_CLI_PATH must point at the lbekf executable"
#endif

using namespace lbekf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += "; over time limit";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s [%.1f s, limit %.0f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs,
              limit_s);
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Realization random_plane(std::size_t n, double side, double r, Rng& gen) {
  std::vector<double> c(2 * n);
  for (double& v : c) v = gen.uniform(0.0, side);
  return Realization(2, std::move(c), r);
}

// Points on a unit circle, radius chosen between the neighbor and
// second-neighbor chord so the geometric graph is exactly the cycle.
Realization circle(std::size_t n, double rotation) {
  std::vector<double> c;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rotation + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    c.push_back(std::cos(t));
    c.push_back(std::sin(t));
  }
  const double adjacent = 2.0 * std::sin(std::numbers::pi / static_cast<double>(n));
  const double second = 2.0 * std::sin(2.0 * std::numbers::pi / static_cast<double>(n));
  return Realization(2, std::move(c), 0.5 * (adjacent + second));
}

Outcome exact_inverse() {
  Rng gen(101);
  const std::size_t sizes[] = {5, 20, 100};
  double worst = 0.0, worst_gj = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = sizes[t % 3];
    const auto a = oracle::random_spd(n, gen.index(n), gen);
    DenseSymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, a(i, j));
    const auto exact = dense_inverse(m);
    const double rel = frobenius_error(l_banded_inverse(m, n - 1), exact) / frobenius_norm(exact);
    worst = std::max(worst, rel);
    const auto gj = oracle::inverse(a);
    worst_gj = std::max(worst_gj, oracle::frob_diff(l_banded_inverse(m, n - 1), gj) / oracle::frob(gj));
  }
  return {worst <= 1e-8 && worst_gj <= 1e-8, "max relative error " + num(worst) + " vs dense_inverse, " +
                                                 num(worst_gj) + " vs Gauss-Jordan (tol 1e-8)"};
}

Outcome inversion_error_shape() {
  const Fig2Config cfg;
  const auto rows = run_fig2(cfg);
  bool ok = true;
  std::string detail;
  for (std::size_t bw : cfg.input_bandwidths) {
    double worst_rise = 0.0;
    for (std::size_t L = bw + 1; L <= 50; ++L)
      worst_rise = std::max(worst_rise, fig2_mean_error(rows, bw, L) - fig2_mean_error(rows, bw, L - 1));
    const double ratio = fig2_mean_error(rows, bw, bw) / fig2_mean_error(rows, bw, 0);
    const bool mono = worst_rise <= 1e-12;
    ok = ok && mono && ratio <= 0.1;
    detail += "bw " + std::to_string(bw) + ": ratio " + num(ratio) + (ratio <= 0.1 ? "" : " > 0.1") +
              (mono ? ", monotone" : ", rise " + num(worst_rise)) + "; ";
  }
  return {ok, detail};
}

Outcome ekf_equivalence() {
  const ScenarioConfig cfg;
  const Rng root = Rng(cfg.seed).split(0);
  Rng pos_gen = root.split(0), beacon_gen = root.split(1), init_gen = root.split(2);
  Rng truth_gen = root.split(3), meas_gen = root.split(4);
  const Realization x0 = scenario_positions(cfg, pos_gen);
  const WsnModel model(2, build_geometric_graph(x0), select_beacons(x0, cfg.n_beacons, beacon_gen), cfg.noise);
  const std::size_t n = model.state_dim();
  std::vector<double> truth = x0.coords();
  std::vector<double> xhat(n);
  for (std::size_t i = 0; i < n; ++i) xhat[i] = truth[i] + init_gen.gaussian(cfg.init_var);

  auto state = init_filter(xhat, cfg.init_var, 59);
  oracle::DenseEkf ref{xhat, oracle::Dense::eye(n)};
  for (double& v : ref.m.a) v *= cfg.init_var;
  const std::vector<double> v(n, 0.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto y = measure(truth, model, meas_gen);
    state = lb_ekf_step(state, model, v, y);
    ref.step(model, v, y.y);
    truth = simulate_step(truth, v, model, truth_gen);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(state.xhat[i] - ref.x[i]));
  }
  return {n == 60 && worst <= 1e-9, "max state deviation " + num(worst) + " (tol 1e-9)"};
}

Outcome mse_ordering() {
  const ScenarioConfig cfg;
  const auto res = run_localization(cfg);
  const auto ekf = mse_curves(res.of(Algorithm::ekf));
  const auto vr = mse_curves(res.of(Algorithm::lbekf_vr));
  const auto novr = mse_curves(res.of(Algorithm::lbekf_novr));
  const double e = steady_state_total(ekf, 20), a = steady_state_total(vr, 20), b = steady_state_total(novr, 20);
  const bool c1 = e <= 1.05 * a, c2 = b >= 1.1 * a, c3 = std::abs(a - e) <= 0.3 * e;
  std::string detail = "EKF " + num(e) + ", LB+VR " + num(a) + ", LB-VR " + num(b) + "; EKF/(LB+VR) " + num(e / a) +
                       (c1 ? " ok" : " > 1.05") + "; (LB-VR)/(LB+VR) " + num(b / a) + (c2 ? " ok" : " < 1.1") +
                       "; |LB+VR - EKF|/EKF " + num(std::abs(a - e) / e) + (c3 ? " ok" : " > 0.3") +
                       "; diverged " + std::to_string(ekf.n_diverged) + "/" + std::to_string(vr.n_diverged) + "/" +
                       std::to_string(novr.n_diverged);
  return {c1 && c2 && c3, detail};
}

Outcome relabel_bound() {
  Rng gen(211);
  std::size_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_plane(5 + gen.index(196), 40.0, gen.uniform(1.0, 30.0), gen);
    if (phi_of_relabeling(x) > phi_max(x)) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000 realizations"};
}

Outcome oracle_chain() {
  Rng gen(223);
  std::size_t violations = 0;
  for (int t = 0; t < 200; ++t) {
    const auto x = random_plane(2 + gen.index(7), 10.0, gen.uniform(1.5, 9.0), gen);
    const auto g = build_geometric_graph(x);
    const std::size_t lo = min_bandwidth_bruteforce(g), mid = phi_of_relabeling(x), hi = phi_max(x);
    if (lo > mid || mid > hi) ++violations;
  }
  const auto c = circle(8, 0.3);
  const auto g = build_geometric_graph(c);
  const std::size_t phi = phi_of_relabeling(c), phi_min = min_bandwidth_bruteforce(g);
  const bool cycle_ok = g.edges().size() == 8 && phi == 2 && phi_min == 2;
  return {violations == 0 && cycle_ok, std::to_string(violations) + " violations in 200 graphs; cycle phi " +
                                           std::to_string(phi) + ", phi_min " + std::to_string(phi_min)};
}

Outcome bandwidth_identity() {
  Rng gen(227);
  std::size_t generic = 0, mismatch = 0, over = 0, checked = 0;
  auto s_bandwidth = [](const Realization& x, const WsnModel& m) {
    return bandwidth(information_matrix(jacobian(x.coords(), m), m), 1e-12);
  };
  while (generic < 200) {
    const auto x = random_plane(10 + gen.index(40), 40.0, gen.uniform(6.0, 15.0), gen);
    const WsnModel m(2, build_geometric_graph(x), {0}, {});
    if (m.graph().edges().empty()) continue;
    ++generic;
    ++checked;
    const std::size_t want = 2 * (graph_bandwidth(m.graph()) + 1) - 1;
    const std::size_t got = s_bandwidth(x, m);
    if (got != want) ++mismatch;
    if (got > want) ++over;
  }
  // Lattices with unit spacing and collinear sets: every edge is axis-parallel.
  for (int t = 0; t < 100; ++t) {
    const std::size_t w = 2 + gen.index(6), h = 1 + gen.index(5);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < h; ++j) pts.emplace_back(static_cast<double>(i), static_cast<double>(j));
    if (t % 2 == 1)
      for (auto& p : pts) std::swap(p.first, p.second);
    std::shuffle(pts.begin(), pts.end(), gen);
    std::vector<double> c;
    for (auto [a, b] : pts) {
      c.push_back(a);
      c.push_back(b);
    }
    const Realization x(2, std::move(c), 1.0);
    const WsnModel m(2, build_geometric_graph(x), {0}, {});
    ++checked;
    if (s_bandwidth(x, m) > 2 * (graph_bandwidth(m.graph()) + 1) - 1) ++over;
  }
  return {mismatch == 0 && over == 0, std::to_string(mismatch) + " equality misses in 200 generic; " +
                                          std::to_string(over) + " upper-bound misses in " + std::to_string(checked)};
}

Outcome jacobian_fd() {
  Rng gen(229);
  const double step = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto x0 = random_plane(5 + gen.index(20), 30.0, 12.0, gen);
    const WsnModel m(2, build_geometric_graph(x0), {0, 1}, {});
    std::vector<double> x = x0.coords();
    for (double& v : x) v += gen.gaussian(1.0);
    const auto h = jacobian(x, m).to_dense();
    const std::size_t cols = x.size();
    for (std::size_t c = 0; c < cols; ++c) {
      const double keep = x[c];
      x[c] = keep + step;
      const auto up = h_eval(x, m).values;
      x[c] = keep - step;
      const auto dn = h_eval(x, m).values;
      x[c] = keep;
      for (std::size_t r = 0; r < up.size(); ++r) {
        const double fd = (up[r] - dn[r]) / (2.0 * step);
        const double j = h[r * cols + c];
        worst = std::max(worst, std::abs(fd - j) / std::max(1.0, std::abs(j)));
      }
    }
  }
  return {worst <= 1e-5, "max relative deviation " + num(worst) + " (tol 1e-5)"};
}

Outcome scan_sublinear() {
  ScanConfig cfg;
  cfg.lambdas = {0.1};
  const std::vector<double> ev{100, 400, 1600};
  cfg.sides.clear();
  for (double e : ev) cfg.sides.push_back(std::sqrt(e / 0.1));
  cfg.trials = 500;
  const auto rows = run_scan(cfg);
  std::vector<double> mean(ev.size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < ev.size(); ++i)
      if (r.side == cfg.sides[i]) mean[i] += static_cast<double>(r.phi_max) / static_cast<double>(cfg.trials);
  const double slope = loglog_slope(ev, mean);
  bool within = true;
  std::string detail = "slope " + num(slope) + " (< 0.8); mean/heuristic";
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double heuristic = cfg.radius * std::sqrt(0.1 * ev[i]);
    const double q = mean[i] / heuristic;
    within = within && q >= 1.0 / 3.0 && q <= 3.0;
    detail += " " + num(q);
  }
  return {slope < 0.8 && within, detail};
}

Outcome poisson_stats() {
  RggConfig cfg;
  cfg.side_lengths = {40.0, 40.0};
  cfg.rate = 0.01;
  Rng gen(233);
  const int draws = 10000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double n = static_cast<double>(sample_rgg(cfg, gen).second.size());
    s += n;
    s2 += n * n;
  }
  const double mean = s / draws;
  const double var = (s2 - draws * mean * mean) / (draws - 1);

  const double lambda = 0.01, side = 40.0, r = 15.0;
  double strip = 0.0;
  for (int t = 0; t < draws; ++t)
    strip += static_cast<double>(count_in_window(sample_strip_coordinates(lambda, side, gen), 12.0, r));
  strip /= draws;
  const double want = lambda * side * r;
  const bool ok = std::abs(mean - 16.0) <= 0.8 && std::abs(var - 16.0) <= 0.8 && std::abs(strip - want) <= 0.05 * want;
  return {ok, "mean " + num(mean) + ", variance " + num(var) + " (16 +/- 0.8); strip mean " + num(strip) + " vs " +
                  num(want)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("lbekf_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  const std::vector<std::string> runs = {
      "fig2 --n 80 --bandwidths 3 9 --L-max 12 --trials 2",
      "--jobs 2 localize --trials 4 --timesteps 15",
      "scan --trials 40",
      "rgg --lambda 0.02",
  };
  std::size_t compared = 0, differing = 0;
  std::string detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path a = root / ("a" + std::to_string(i)), b = root / ("b" + std::to_string(i));
    fs::create_directories(a);
    fs::create_directories(b);
    for (const auto& dir : {a, b}) {
      const std::string cmd = std::string("\"") + LBEKF_CLI_PATH + "\" --seed 97 --out \"" + dir.string() + "\" " +
                              runs[i] + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        fs::remove_all(root);
        return {false, "command failed: " + runs[i]};
      }
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(b / entry.path().filename())) {
        ++differing;
        detail += " " + entry.path().filename().string();
      }
    }
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " CSVs compared, " + std::to_string(differing) + " differ" + detail};
}

}  // namespace

int main() {
  criterion("exact-inverse recovery", 10, exact_inverse);
  criterion("inversion error curve shape", 120, inversion_error_shape);
  criterion("EKF equivalence at L = 59", 10, ekf_equivalence);
  criterion("localization MSE ordering", 300, mse_ordering);
  criterion("relabeling bandwidth bound", 30, relabel_bound);
  criterion("bandwidth oracle chain", 60, oracle_chain);
  criterion("information bandwidth", 30, bandwidth_identity);
  criterion("Jacobian finite differences", 5, jacobian_fd);
  criterion("scan-statistic sublinearity", 60, scan_sublinear);
  criterion("Poisson generator", 30, poisson_stats);
  criterion("CLI determinism", 120, determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
