#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lbekf/banded.hpp"
#include "lbekf/error.hpp"
#include "lbekf/model.hpp"

namespace lbekf {

struct FilterState {
  std::vector<double> xhat;  // stacked position estimates (m)
  BandedSymMatrix m;         // covariance estimate, bandwidth <= band (m^2)
  std::size_t band = 0;      // L, counted in scalar rows of the d|V| state
  std::size_t k = 0;         // timestep
};

// M_0 = var0 * I.
inline FilterState init_filter(std::vector<double> xhat0, double var0, std::size_t band) {
  if (xhat0.empty()) throw Error(Errc::invalid_argument, "init_filter: empty state");
  if (!(var0 > 0.0)) throw Error(Errc::invalid_argument, "init_filter: initial variance must be > 0");
  if (band > xhat0.size() - 1)
    throw Error(Errc::invalid_argument, "init_filter: L=" + std::to_string(band) + " exceeds state dimension - 1 (" +
                                            std::to_string(xhat0.size() - 1) + ")");
  const std::size_t n = xhat0.size();
  return FilterState{std::move(xhat0), BandedSymMatrix::identity(n, var0), band, 0};
}

// One merged predict/update step:
//   H  = jacobian(xhat)                     linearize at the pre-update estimate
//   P  = M + sigma_p I
//   M+ = Lband( Lband(P)^{-1} + S )^{-1}    S = H^T R^{-1} H
//   x+ = xhat + v + M+ H^T R^{-1} (y - h(xhat))
// Failures of the banded inversion or a non-positive covariance diagonal are
// reported as DivergenceError carrying the timestep.
inline FilterState lb_ekf_step(const FilterState& state, const WsnModel& model, std::span<const double> v,
                               const MeasurementBatch& y) {
  const std::size_t n = model.state_dim();
  if (state.xhat.size() != n || state.m.size() != n || v.size() != n)
    throw Error(Errc::dimension_mismatch, "lb_ekf_step: state, covariance or input size differs from model");
  if (y.y.size() != model.measurement_size())
    throw Error(Errc::dimension_mismatch, "lb_ekf_step: measurement batch length " + std::to_string(y.y.size()) +
                                              " != " + std::to_string(model.measurement_size()));
  if (state.band > n - 1) throw Error(Errc::invalid_argument, "lb_ekf_step: L exceeds state dimension - 1");

  const std::size_t step = state.k + 1;
  SparseJacobian h = [&] {
    try {
      return jacobian(state.xhat, model);
    } catch (const Error& e) {
      throw DivergenceError(step, e.what());
    }
  }();

  BandedSymMatrix m_next;
  try {
    const BandedSymMatrix p = add_scaled_identity(state.m, model.noise().sigma_p);
    const BandedSymMatrix p_inv = l_banded_inverse(p, state.band);
    const BandedSymMatrix s = information_matrix(h, model);
    m_next = l_banded_inverse(add(p_inv, s), state.band);
  } catch (const Error& e) {
    if (e.code() != Errc::singular_submatrix) throw;
    throw DivergenceError(step, e.what());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double v_ii = m_next(i, i);
    if (!(v_ii > 0.0) || !std::isfinite(v_ii))
      throw DivergenceError(step, "covariance diagonal entry " + std::to_string(i) + " is " + std::to_string(v_ii));
  }

  const Prediction pred = h_eval(state.xhat, model);
  std::vector<double> innovation(y.y.size());
  for (std::size_t i = 0; i < innovation.size(); ++i) innovation[i] = y.y[i] - pred.values[i];
  const std::vector<double> correction = gain_apply(m_next, h, model, innovation);

  FilterState out{state.xhat, std::move(m_next), state.band, step};
  for (std::size_t i = 0; i < n; ++i) {
    out.xhat[i] += v[i] + correction[i];
    if (!std::isfinite(out.xhat[i])) throw DivergenceError(step, "non-finite state estimate");
  }
  return out;
}

// Exact EKF: the banded step with L = d|V| - 1.
inline FilterState ekf_step(const FilterState& state, const WsnModel& model, std::span<const double> v,
                            const MeasurementBatch& y) {
  FilterState full = state;
  full.band = model.state_dim() - 1;
  return lb_ekf_step(full, model, v, y);
}

// d x d diagonal block of M for one agent.
inline DenseSymMatrix covariance_block(const FilterState& state, std::size_t agent, std::size_t dim) {
  if (dim == 0 || (agent + 1) * dim > state.m.size())
    throw Error(Errc::index_out_of_range, "covariance_block: agent " + std::to_string(agent) + " out of range");
  return principal_submatrix(state.m, agent * dim, agent * dim + dim - 1);
}

}  // namespace lbekf
