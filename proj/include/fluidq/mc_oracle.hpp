#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fluidq/levy_model.hpp"
#include "fluidq/rng.hpp"

namespace fluidq {

// Monte Carlo simulator of Lambda_t = t - L^{-1}_t over i.i.d. cycles.  Jumps
// above epsilon are a compound Poisson process; jumps below epsilon are
// replaced by their mean, absorbed into the drift (slope 1 - b_eps between
// jumps).  Because the path increases deterministically between jumps,
// B = first jump time with a negative post-jump value, I = -Lambda_B, and
// Q* = max over pre-jump peaks are computed without time discretization; the
// only bias is the epsilon truncation.

struct SimConfig {
  LevyModel model = LevyModel::brownian(0.5);
  std::uint64_t n_cycles = 100000;
  double epsilon = 1e-6;       // jump-size truncation
  std::uint64_t seed = 1;
  int workers = 1;
  std::uint64_t max_events_per_cycle = 1000000;  // runaway guard; exceeding cycles are censored
};

struct ExcursionCycle {
  double b;       // busy period, > 0
  double i;       // idle period, > 0
  double q_star;  // maximum over the busy period, > 0
};

struct CycleStats {
  std::vector<ExcursionCycle> samples;
  std::uint64_t censored = 0;
  double compensated_drift = 0.0;  // 1 - b_eps actually used
  double jump_rate = 0.0;          // Pi(eps, inf)
  SimConfig config;

  double mean_b() const;
  double se_b() const;
  double mean_i() const;
  double se_i() const;
};

/// Rate and size sampler for the jump measure restricted to (epsilon, inf).
/// Sizes are drawn by inverse transform on the numerically inverted tail,
/// tabulated at construction on geometric quantiles and checked against the
/// exact tail (construction fails beyond the inversion tolerance); the
/// tempered-stable kind mixes in its compound-Poisson gamma component, which
/// is sampled exactly.
class JumpSampler {
 public:
  JumpSampler(const LevyModel& m, double epsilon);

  double rate() const { return rate_; }
  double mean_small_jump() const { return b_eps_; }        // int_0^eps u Pi(du)
  double small_jump_variance() const { return var_eps_; }  // int_0^eps u^2 Pi(du)
  double tail(double x) const;                             // Pi(x, inf)
  double sample(Xoshiro256& rng) const;
  /// Worst relative tail residual of the tabulated inverse on a check grid.
  double inversion_residual() const { return residual_; }

 private:
  double ia_tail(double x) const;            // infinite-activity component tail
  double ia_log_tail_slope(double x) const;  // d log(ia_tail) / d log x
  double sample_infinite_activity(Xoshiro256& rng) const;
  double invert_tail(double target) const;

  ModelKind kind_;
  double eps_;
  double c_ = 0.0;                    // Brownian parameter
  TemperedStableParams ts_{};
  double rate_ = 0.0;                 // total restricted rate
  double ia_rate_ = 0.0;              // infinite-activity component above eps
  double cp_rate_ = 0.0;              // gamma compound-Poisson component above eps (TS only)
  double b_eps_ = 0.0;
  double var_eps_ = 0.0;
  double residual_ = 0.0;
  std::vector<double> inv_log_u_;     // log jump size at geometric tail quantiles
  double log_v_lo_ = 0.0;             // log of the smallest tabulated quantile
  double inv_step_ = 0.0;
};

CycleStats simulate_cycles(const SimConfig& cfg);

/// Sample mean and standard error of e^{-alpha B - beta I} 1(Q* <= x).
std::pair<double, double> empirical_transform(const CycleStats& s, double alpha,
                                              double beta, double x);

/// Palm-inverted ("observed") laws: each cycle weighted by its busy (or idle)
/// length, converting typical-cycle laws into laws seen from a stationary
/// origin conditioned on Q_0 > 0 (or Q_0 = 0).
class LengthBiasedView {
 public:
  explicit LengthBiasedView(const CycleStats& s);

  double total_weight() const { return sum_b_; }
  std::size_t size() const { return b_.size(); }

  /// P(Q* <= x | Q_0 > 0) estimate.
  double qstar_cdf(double x) const;

  /// Busy-length mean under the observed law (= E[B^2]/E[B]).
  double mean_busy() const;

  /// E[e^{-alpha g(1) + beta d(0)} | Q_0 > 0] estimate and standard error,
  /// from E_d[(e^{-beta B} - e^{-alpha B})/(alpha - beta)] / E_d[B].
  std::pair<double, double> busy_endpoints_transform(double alpha, double beta) const;

  /// E[e^{-alpha d(0) + beta g(0)} | Q_0 = 0] estimate and standard error.
  std::pair<double, double> idle_endpoints_transform(double alpha, double beta) const;

 private:
  std::vector<double> b_sorted_;      // busy lengths sorted by q_star
  std::vector<double> q_sorted_;      // q_star ascending
  std::vector<double> prefix_b_;      // prefix sums of b_sorted_
  std::vector<double> b_, i_;         // in sample order
  double sum_b_ = 0.0, sum_i_ = 0.0;
};

/// Sample file: CSV columns b,i,q_star with '#' provenance comments.
void write_sample_csv(const CycleStats& s, const std::string& path);

}  // namespace fluidq
