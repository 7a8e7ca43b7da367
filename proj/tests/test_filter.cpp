#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lbekf/filter.hpp"
#include "lbekf/graph.hpp"
#include "oracle.hpp"

using namespace lbekf;

namespace {

struct Scenario {
  Realization x;
  WsnModel model;
};

Scenario default_like(Rng& gen, std::size_t n = 30, std::size_t beacons = 8) {
  std::vector<double> c(2 * n);
  for (double& v : c) v = gen.uniform(0.0, 40.0);
  Realization x(2, std::move(c), 15.0);
  std::vector<std::size_t> b;
  for (std::size_t i = 0; i < beacons; ++i) b.push_back(i);
  WsnModel m(2, build_geometric_graph(x), b, {0.02, 2.0, 10.0});
  return {std::move(x), std::move(m)};
}

std::vector<double> perturbed(const std::vector<double>& x, double var, Rng& gen) {
  std::vector<double> out = x;
  for (double& v : out) v += gen.gaussian(var);
  return out;
}

}  // namespace

TEST(InitFilter, Basics) {
  const auto s = init_filter(std::vector<double>(6, 0.0), 5.0, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(s.m(i, j), i == j ? 5.0 : 0.0);
  EXPECT_EQ(bandwidth(init_filter(std::vector<double>(6, 0.0), 1.0, 4).m), 0u);
  EXPECT_EQ(s.k, 0u);
  EXPECT_NO_THROW(init_filter(std::vector<double>(6, 0.0), 1.0, 5));
  EXPECT_THROW(init_filter(std::vector<double>(6, 0.0), 1.0, 6), Error);
  EXPECT_THROW(init_filter(std::vector<double>(6, 0.0), 0.0, 2), Error);
}

TEST(CovarianceBlock, Basics) {
  const auto s = init_filter(std::vector<double>(6, 0.0), 5.0, 3);
  for (std::size_t a = 0; a < 3; ++a) {
    const auto b = covariance_block(s, a, 2);
    EXPECT_EQ(b(0, 0), 5.0);
    EXPECT_EQ(b(1, 1), 5.0);
    EXPECT_EQ(b(0, 1), 0.0);
  }
  EXPECT_THROW(covariance_block(s, 3, 2), Error);
}

TEST(LbEkfStep, FullBandMatchesDenseOracle) {
  Rng gen(1);
  const auto sc = default_like(gen);
  const std::size_t n = sc.model.state_dim();
  std::vector<double> truth = sc.x.coords();
  auto state = init_filter(perturbed(truth, 5.0, gen), 5.0, n - 1);
  oracle::DenseEkf ref{state.xhat, oracle::Dense::eye(n)};
  for (double& v : ref.m.a) v *= 5.0;
  const std::vector<double> v(n, 0.0);
  for (int k = 0; k < 100; ++k) {
    const auto y = measure(truth, sc.model, gen);
    state = lb_ekf_step(state, sc.model, v, y);
    ref.step(sc.model, v, y.y);
    truth = simulate_step(truth, v, sc.model, gen);
    double dx = 0.0;
    for (std::size_t i = 0; i < n; ++i) dx = std::max(dx, std::abs(state.xhat[i] - ref.x[i]));
    ASSERT_LE(dx, 1e-9) << "step " << k;
    ASSERT_LE(oracle::frob_diff(state.m, ref.m), 1e-8) << "step " << k;
  }
  EXPECT_EQ(state.k, 100u);
}

TEST(LbEkfStep, ZeroInnovationKeepsEstimate) {
  Rng gen(2);
  const auto sc = default_like(gen, 10, 3);
  const auto xhat = perturbed(sc.x.coords(), 1.0, gen);
  const auto s0 = init_filter(xhat, 5.0, 6);
  const MeasurementBatch y{h_eval(xhat, sc.model).values};
  const auto s1 = lb_ekf_step(s0, sc.model, std::vector<double>(xhat.size(), 0.0), y);
  EXPECT_EQ(s1.xhat, xhat);
  for (std::size_t i = 0; i < xhat.size(); ++i) EXPECT_LT(s1.m(i, i), 5.0 + 0.02);
}

TEST(LbEkfStep, BandSymmetryAndPositiveDiagonal) {
  Rng gen(3);
  const auto sc = default_like(gen);
  const std::size_t n = sc.model.state_dim();
  std::vector<double> truth = sc.x.coords();
  auto state = init_filter(perturbed(truth, 5.0, gen), 5.0, 20);
  const std::vector<double> v(n, 0.0);
  for (int k = 0; k < 50; ++k) {
    state = lb_ekf_step(state, sc.model, v, measure(truth, sc.model, gen));
    truth = simulate_step(truth, v, sc.model, gen);
    ASSERT_LE(bandwidth(state.m), 20u);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_GT(state.m(i, i), 0.0);
      for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(state.m(i, j), state.m(j, i));
    }
  }
}

TEST(LbEkfStep, DimensionChecks) {
  Rng gen(4);
  const auto sc = default_like(gen, 6, 2);
  const auto s = init_filter(sc.x.coords(), 1.0, 3);
  const MeasurementBatch y{h_eval(sc.x.coords(), sc.model).values};
  EXPECT_THROW(lb_ekf_step(s, sc.model, std::vector<double>(5, 0.0), y), Error);
  EXPECT_THROW(lb_ekf_step(s, sc.model, std::vector<double>(12, 0.0), MeasurementBatch{{1.0}}), Error);
}

TEST(LbEkfStep, CoincidentEstimatesReportDivergence) {
  const WsnModel m(2, WsnGraph(2, {{0, 1}}), {0}, {0.02, 2.0, 10.0});
  auto s = init_filter({1, 1, 1, 1}, 1.0, 3);
  s.k = 6;
  try {
    lb_ekf_step(s, m, std::vector<double>(4, 0.0), MeasurementBatch{{1, 1, 2}});
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.timestep(), 7u);
    EXPECT_EQ(e.code(), Errc::filter_divergence);
  }
}

TEST(EkfStep, EqualsFullBandStepBitwise) {
  Rng gen(5);
  const auto sc = default_like(gen, 12, 3);
  const auto x = perturbed(sc.x.coords(), 2.0, gen);
  const auto y = measure(sc.x.coords(), sc.model, gen);
  const std::vector<double> v(x.size(), 0.0);
  const auto a = ekf_step(init_filter(x, 5.0, 0), sc.model, v, y);
  const auto b = lb_ekf_step(init_filter(x, 5.0, x.size() - 1), sc.model, v, y);
  EXPECT_EQ(a.xhat, b.xhat);
  EXPECT_TRUE(a.m == b.m);
}

TEST(EkfStep, ScalarRiccatiFixedPoint) {
  const double sp = 0.3, sq = 2.0;
  const WsnModel m(1, WsnGraph(1, {}), {0}, {sp, sq, 1.0});
  auto s = init_filter({0.0}, 5.0, 0);
  for (int k = 0; k < 200; ++k) s = ekf_step(s, m, std::vector<double>{0.0}, MeasurementBatch{{0.0}});
  const double fixed = 0.5 * (-sp + std::sqrt(sp * sp + 4.0 * sp * sq));
  EXPECT_NEAR(s.m(0, 0), fixed, 1e-12);
  double it = 5.0;
  for (int k = 0; k < 1000; ++k) it = 1.0 / (1.0 / (it + sp) + 1.0 / sq);
  EXPECT_NEAR(it, fixed, 1e-12);
}

TEST(EkfStep, TotalErrorDropsAndPlateaus) {
  Rng gen(6);
  const auto sc = default_like(gen);
  const std::size_t n = sc.model.state_dim();
  double early = 0.0, late = 0.0, first = 0.0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> truth = sc.x.coords();
    auto s = init_filter(perturbed(truth, 5.0, gen), 5.0, n - 1);
    const std::vector<double> v(n, 0.0);
    for (int k = 0; k <= 100; ++k) {
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i) e += (truth[i] - s.xhat[i]) * (truth[i] - s.xhat[i]);
      if (k == 0) first += e;
      if (k >= 40 && k < 60) early += e / 20.0;
      if (k >= 80) late += e / 21.0;
      if (k == 100) break;
      s = ekf_step(s, sc.model, v, measure(truth, sc.model, gen));
      truth = simulate_step(truth, v, sc.model, gen);
    }
  }
  EXPECT_LT(late, 0.5 * first);
  EXPECT_LT(std::abs(late - early), 0.25 * early);
}

TEST(EkfStep, LabelEquivariantAtFullBand) {
  Rng gen(7);
  const auto sc = default_like(gen, 15, 4);
  const std::size_t n = sc.model.state_dim();
  const auto p = vertex_relabel(sc.x);
  std::vector<std::size_t> beacons;
  for (std::size_t b : sc.model.beacons()) beacons.push_back(p[b]);
  const WsnModel mp(2, permute_graph(sc.model.graph(), p), beacons, sc.model.noise());

  auto to_new = [&](const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size() / 2; ++i)
      for (std::size_t c = 0; c < 2; ++c) out[2 * p[i] + c] = x[2 * i + c];
    return out;
  };
  // Beacon rows follow beacon label order and edge rows follow edge order, so
  // the relabeled batch is gathered entry by entry.
  auto y_new = [&](const MeasurementBatch& y) {
    std::vector<double> out(y.y.size());
    const auto inv = p.inverse();
    std::size_t r = 0;
    for (std::size_t b : mp.beacons()) {
      const auto pos = std::lower_bound(sc.model.beacons().begin(), sc.model.beacons().end(), inv[b]) -
                       sc.model.beacons().begin();
      for (std::size_t c = 0; c < 2; ++c) out[r++] = y.y[2 * pos + c];
    }
    const auto& oe = sc.model.graph().edges();
    for (auto [i, j] : mp.graph().edges()) {
      Edge e{std::min(inv[i], inv[j]), std::max(inv[i], inv[j])};
      out[r++] = y.y[2 * sc.model.beacons().size() + (std::lower_bound(oe.begin(), oe.end(), e) - oe.begin())];
    }
    return MeasurementBatch{out};
  };

  std::vector<double> truth = sc.x.coords();
  const auto x0 = perturbed(truth, 5.0, gen);
  auto a = init_filter(x0, 5.0, n - 1);
  auto b = init_filter(to_new(x0), 5.0, n - 1);
  const std::vector<double> v(n, 0.0);
  for (int k = 0; k < 30; ++k) {
    const auto y = measure(truth, sc.model, gen);
    a = ekf_step(a, sc.model, v, y);
    b = ekf_step(b, mp, v, y_new(y));
    truth = simulate_step(truth, v, sc.model, gen);
  }
  const auto a_new = to_new(a.xhat);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b.xhat[i], a_new[i], 1e-9);
}
