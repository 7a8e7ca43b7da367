#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lbekf {

enum class Errc {
  dimension_mismatch,
  index_out_of_range,
  not_positive_definite,
  singular_submatrix,
  disconnected_graph,
  too_large,
  coincident_endpoints,
  invalid_argument,
  filter_divergence,
  all_diverged,
  parse_error,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::not_positive_definite: return "not-positive-definite";
    case Errc::singular_submatrix: return "singular-submatrix";
    case Errc::disconnected_graph: return "disconnected-graph";
    case Errc::too_large: return "too-large";
    case Errc::coincident_endpoints: return "coincident-endpoints";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::filter_divergence: return "filter-divergence";
    case Errc::all_diverged: return "all-diverged";
    case Errc::parse_error: return "parse-error";
  }
  return "unknown";
}

// All library failures are reported through this type; `code()` identifies the
// failure class so callers (the CLI, the Monte Carlo harness) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the filter when a banded inversion fails or the covariance loses
// its positive diagonal. Carries the timestep at which it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t timestep, const std::string& what)
      : Error(Errc::filter_divergence,
              "timestep " + std::to_string(timestep) + ": " + what),
        timestep_(timestep) {}

  std::size_t timestep() const noexcept { return timestep_; }

 private:
  std::size_t timestep_;
};

}  // namespace lbekf
