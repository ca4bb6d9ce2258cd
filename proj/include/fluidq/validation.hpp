#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluidq/mc_oracle.hpp"

namespace fluidq {

struct ValidationCheck {
  std::string name;
  double analytic = 0.0;
  double estimate = 0.0;
  double tolerance = 0.0;  // |analytic - estimate| <= tolerance passes
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::string model;
  std::uint64_t seed = 0;
  std::uint64_t n_cycles = 0;
  double epsilon = 0.0;
  int workers = 1;
  std::string version;

  bool overall_pass() const;
  std::string to_json() const;  // machine-readable report document
};

/// Paired analytic-vs-Monte-Carlo validation: analytic self-consistency checks
/// for the model plus, when cfg.n_cycles > 0, simulation-based comparisons at
/// 3-standard-error (or sup-distance) tolerances.  Monte Carlo sup-distance
/// tolerances are calibrated for 1e6 cycles and widen as 1/sqrt(n) below that.
ValidationReport run_validation(const SimConfig& cfg);

}  // namespace fluidq
