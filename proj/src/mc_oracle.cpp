#include "fluidq/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fluidq/csv.hpp"
#include "fluidq/special_fns.hpp"
#include "fluidq/version.hpp"

namespace fluidq {

namespace {

constexpr double kInvTableLogVLo = -32.236191301916641;  // log(1e-14)
constexpr int kInvTableSize = 8192;
constexpr double kInversionTolerance = 1e-4;  // relative tail residual allowed

// Standard normal via Box-Muller (second value discarded; used only for the
// low-rate gamma component).
double sample_normal(Xoshiro256& rng) {
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang, extended to shape < 1 by the boost G(a) = G(a+1) U^{1/a}.
double sample_gamma(double shape, double rate, Xoshiro256& rng) {
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(rng.next_double(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double cc = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + cc * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
      return boost * d * v / rate;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JumpSampler
// ---------------------------------------------------------------------------

JumpSampler::JumpSampler(const LevyModel& m, double epsilon) : kind_(m.kind()), eps_(epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("JumpSampler: need epsilon > 0");
  switch (kind_) {
    case ModelKind::BrownianLocalTime: {
      c_ = m.brownian_params().c;
      const double arg = c_ * std::sqrt(0.5 * eps_);
      ia_rate_ = tail(eps_);
      cp_rate_ = 0.0;
      b_eps_ = (c_ > 0.0) ? std::erf(arg) / c_
                          : std::sqrt(2.0 * eps_ / std::numbers::pi);
      // int_0^eps u^2 Pi(du) = P(3/2, c^2 eps/2)/c^3 (limit 2 eps^{3/2}/(3 sqrt(2 pi)))
      var_eps_ = (c_ > 0.0)
                     ? gamma_p(1.5, 0.5 * c_ * c_ * eps_) / (c_ * c_ * c_)
                     : 2.0 / 3.0 * std::pow(eps_, 1.5) / std::sqrt(2.0 * std::numbers::pi);
      break;
    }
    case ModelKind::TemperedStableLocalTime: {
      ts_ = m.tempered_stable_params();
      const double ge = ts_.gamma * eps_;
      ia_rate_ = std::pow(ts_.gamma, ts_.nu) / std::tgamma(ts_.nu) *
                 std::pow(eps_, ts_.nu - 1.0) * std::exp(-ge);
      cp_rate_ = ts_.phi * gamma_q(ts_.nu, ge);
      const double nu = ts_.nu;
      b_eps_ = (1.0 - nu) * gamma_p(nu, ge) + nu * gamma_p(nu + 1.0, ge) +
               ts_.phi * nu / ts_.gamma * gamma_p(nu + 1.0, ge);
      var_eps_ = nu / ts_.gamma *
                     ((1.0 - nu) * gamma_p(nu + 1.0, ge) +
                      (nu + 1.0) * gamma_p(nu + 2.0, ge)) +
                 ts_.phi * nu * (nu + 1.0) / (ts_.gamma * ts_.gamma) *
                     gamma_p(nu + 2.0, ge);
      break;
    }
    case ModelKind::Custom:
      throw std::invalid_argument(
          "JumpSampler: custom models expose psi only, no jump description");
  }
  rate_ = ia_rate_ + cp_rate_;

  // Tabulate the inverse of the infinite-activity tail on geometric quantiles
  // of v = T(x)/T(eps); interpolation is linear in (log v, log x).
  const double t_eps = ia_tail(eps_);
  inv_step_ = -kInvTableLogVLo / kInvTableSize;
  log_v_lo_ = kInvTableLogVLo;
  inv_log_u_.resize(kInvTableSize + 1);
  for (int i = 0; i <= kInvTableSize; ++i) {
    const double logv = kInvTableLogVLo + i * inv_step_;
    inv_log_u_[i] = std::log(invert_tail(std::exp(logv) * t_eps));
  }
  // residual check halfway between the table nodes
  double worst = 0.0;
  for (int i = 0; i < kInvTableSize; ++i) {
    const double logv = kInvTableLogVLo + (i + 0.5) * inv_step_;
    const double u = std::exp(0.5 * (inv_log_u_[i] + inv_log_u_[i + 1]));
    const double target = std::exp(logv) * t_eps;
    const double got = ia_tail(u);
    worst = std::max(worst, std::abs(got / target - 1.0));
  }
  residual_ = worst;
  if (residual_ > kInversionTolerance)
    throw std::runtime_error("JumpSampler: tail-inversion tolerance failure (residual " +
                             std::to_string(residual_) + ")");
}

double JumpSampler::tail(double x) const {
  if (kind_ == ModelKind::BrownianLocalTime) {
    const double b = 0.5 * c_ * c_;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * std::exp(-b * x) -
           c_ * erfc(c_ * std::sqrt(0.5 * x));
  }
  return ia_tail(x) + ts_.phi * gamma_q(ts_.nu, ts_.gamma * x);
}

double JumpSampler::ia_tail(double x) const {
  if (kind_ == ModelKind::BrownianLocalTime) return tail(x);
  return std::pow(ts_.gamma, ts_.nu) / std::tgamma(ts_.nu) * std::pow(x, ts_.nu - 1.0) *
         std::exp(-ts_.gamma * x);
}

double JumpSampler::ia_log_tail_slope(double x) const {
  // d log T / d log x of the infinite-activity tail
  if (kind_ == ModelKind::BrownianLocalTime) {
    const double density = std::exp(-0.5 * c_ * c_ * x) /
                           std::sqrt(2.0 * std::numbers::pi * x * x * x);
    return -x * density / tail(x);
  }
  return (ts_.nu - 1.0) - ts_.gamma * x;
}

double JumpSampler::invert_tail(double target) const {
  // Solve ia_tail(x) = target by bisection bracket + Newton in log space.
  double lo = eps_;
  double hi = eps_;
  for (int i = 0; i < 400 && ia_tail(hi) > target; ++i) hi *= 2.0;
  if (ia_tail(hi) > target)
    throw std::runtime_error("JumpSampler: tail bracket failure");
  const double lt = std::log(target);
  double lx = std::log(std::max(lo, 0.5 * (lo + hi)));
  double llo = std::log(lo), lhi = std::log(hi);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(ia_tail(std::exp(lx))) - lt;
    if (f > 0.0)
      llo = lx;
    else
      lhi = lx;
    const double slope = ia_log_tail_slope(std::exp(lx));
    double ln = (slope < 0.0) ? lx - f / slope : 0.5 * (llo + lhi);
    if (!(ln > llo && ln < lhi)) ln = 0.5 * (llo + lhi);
    if (std::abs(ln - lx) < 1e-14 * std::max(1.0, std::abs(ln))) return std::exp(ln);
    lx = ln;
  }
  return std::exp(lx);
}

double JumpSampler::sample_infinite_activity(Xoshiro256& rng) const {
  const double v = rng.next_double();
  const double logv = std::log(v);
  if (logv <= log_v_lo_) {
    const double t_eps = ia_tail(eps_);
    return invert_tail(v * t_eps);
  }
  const double t = (logv - log_v_lo_) / inv_step_;
  const int k = std::min(static_cast<int>(t), kInvTableSize - 1);
  const double frac = t - k;
  return std::exp(inv_log_u_[k] + frac * (inv_log_u_[k + 1] - inv_log_u_[k]));
}

double JumpSampler::sample(Xoshiro256& rng) const {
  if (cp_rate_ > 0.0 && rng.next_double() * rate_ < cp_rate_) {
    // gamma component conditioned on exceeding eps
    for (int i = 0; i < 100000; ++i) {
      const double g = sample_gamma(ts_.nu, ts_.gamma, rng);
      if (g > eps_) return g;
    }
    throw std::runtime_error("JumpSampler: gamma rejection stalled");
  }
  return sample_infinite_activity(rng);
}

// ---------------------------------------------------------------------------
// simulate_cycles
// ---------------------------------------------------------------------------

namespace {

struct CycleOutcome {
  double b = -1.0, i = -1.0, q = -1.0;
  bool censored = false;
};

CycleOutcome run_cycle(const JumpSampler& js, double slope, double rate,
                       std::uint64_t max_events, Xoshiro256& rng) {
  double t = 0.0, lam = 0.0, peak = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double dt = -std::log(rng.next_double()) / rate;
    const double pre = lam + slope * dt;
    if (pre > peak) peak = pre;
    lam = pre - js.sample(rng);
    t += dt;
    if (lam < 0.0) return {t, -lam, peak, false};
    if (++events >= max_events) return {0, 0, 0, true};
  }
}

}  // namespace

CycleStats simulate_cycles(const SimConfig& cfg) {
  require_valid_for_queue_laws(cfg.model);
  if (cfg.n_cycles < 1) throw std::invalid_argument("simulate_cycles: need n_cycles >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("simulate_cycles: need workers >= 1");

  const JumpSampler js(cfg.model, cfg.epsilon);
  const double slope = cfg.model.drift() - js.mean_small_jump();
  if (!(slope > 0.0))
    throw std::invalid_argument(
        "simulate_cycles: epsilon too large, compensated drift 1 - b_eps <= 0");
  const double rate = js.rate();

  std::vector<CycleOutcome> out(cfg.n_cycles);
  const int workers = static_cast<int>(std::min<std::uint64_t>(cfg.workers, cfg.n_cycles));
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mx;

  auto work = [&](int w) {
    try {
      const std::uint64_t lo = cfg.n_cycles * w / workers;
      const std::uint64_t hi = cfg.n_cycles * (w + 1) / workers;
      for (std::uint64_t k = lo; k < hi && !failed.load(std::memory_order_relaxed); ++k) {
        Xoshiro256 rng(cfg.seed, k);  // one stream per cycle: scheduling-independent
        out[k] = run_cycle(js, slope, rate, cfg.max_events_per_cycle, rng);
        if (!out[k].censored &&
            !(out[k].b > 0.0 && out[k].i > 0.0 && out[k].q > 0.0))
          throw std::logic_error("simulate_cycles: sampled cycle violates B,I,Q* > 0");
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mx);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  CycleStats stats;
  stats.config = cfg;
  stats.compensated_drift = slope;
  stats.jump_rate = rate;
  stats.samples.reserve(cfg.n_cycles);
  for (const auto& o : out) {
    if (o.censored)
      ++stats.censored;
    else
      stats.samples.push_back({o.b, o.i, o.q});
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Summaries and estimators
// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> mean_se(const std::vector<ExcursionCycle>& s,
                                  double (ExcursionCycle::*field)) {
  const std::size_t n = s.size();
  if (n == 0) throw std::runtime_error("empty sample");
  double mean = 0.0;
  for (const auto& c : s) mean += c.*field;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& c : s) {
    const double d = c.*field - mean;
    var += d * d;
  }
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

double CycleStats::mean_b() const { return mean_se(samples, &ExcursionCycle::b).first; }
double CycleStats::se_b() const { return mean_se(samples, &ExcursionCycle::b).second; }
double CycleStats::mean_i() const { return mean_se(samples, &ExcursionCycle::i).first; }
double CycleStats::se_i() const { return mean_se(samples, &ExcursionCycle::i).second; }

std::pair<double, double> empirical_transform(const CycleStats& s, double alpha,
                                              double beta, double x) {
  if (s.samples.empty()) throw std::runtime_error("empirical_transform: empty sample");
  const double n = static_cast<double>(s.samples.size());
  double mean = 0.0, sq = 0.0;
  for (const auto& c : s.samples) {
    const double g = (c.q_star <= x) ? std::exp(-alpha * c.b - beta * c.i) : 0.0;
    mean += g;
    sq += g * g;
  }
  mean /= n;
  const double var = std::max(0.0, (sq / n - mean * mean) * n / std::max(1.0, n - 1.0));
  return {mean, std::sqrt(var / n)};
}

LengthBiasedView::LengthBiasedView(const CycleStats& s) {
  if (s.samples.empty()) throw std::runtime_error("LengthBiasedView: empty sample");
  const std::size_t n = s.samples.size();
  b_.reserve(n);
  i_.reserve(n);
  std::vector<std::pair<double, double>> qb(n);
  for (std::size_t k = 0; k < n; ++k) {
    b_.push_back(s.samples[k].b);
    i_.push_back(s.samples[k].i);
    qb[k] = {s.samples[k].q_star, s.samples[k].b};
  }
  std::sort(qb.begin(), qb.end());
  q_sorted_.resize(n);
  b_sorted_.resize(n);
  prefix_b_.resize(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    q_sorted_[k] = qb[k].first;
    b_sorted_[k] = qb[k].second;
    prefix_b_[k + 1] = prefix_b_[k] + qb[k].second;
  }
  sum_b_ = std::accumulate(b_.begin(), b_.end(), 0.0);
  sum_i_ = std::accumulate(i_.begin(), i_.end(), 0.0);
}

double LengthBiasedView::qstar_cdf(double x) const {
  const auto it = std::upper_bound(q_sorted_.begin(), q_sorted_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - q_sorted_.begin());
  return prefix_b_[k] / sum_b_;
}

double LengthBiasedView::mean_busy() const {
  double sq = 0.0;
  for (double b : b_) sq += b * b;
  return sq / sum_b_;
}

namespace {

// Ratio estimator mean(h)/mean(w) with delta-method standard error.
std::pair<double, double> ratio_estimate(const std::vector<double>& h,
                                         const std::vector<double>& w) {
  const double n = static_cast<double>(h.size());
  double hbar = 0.0, wbar = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    hbar += h[k];
    wbar += w[k];
  }
  hbar /= n;
  wbar /= n;
  const double r = hbar / wbar;
  double var = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double d = h[k] - r * w[k];
    var += d * d;
  }
  var /= (n - 1.0);
  return {r, std::sqrt(var / n) / wbar};
}

// (e^{-beta L} - e^{-alpha L})/(alpha - beta), the within-cycle time average of
// e^{-alpha (L - t) - beta t}; diagonal limit L e^{-alpha L}.
double cycle_window_weight(double len, double alpha, double beta) {
  if (std::abs(alpha - beta) <= 1e-12 * (1.0 + alpha))
    return len * std::exp(-alpha * len);
  return (std::exp(-beta * len) - std::exp(-alpha * len)) / (alpha - beta);
}

}  // namespace

std::pair<double, double> LengthBiasedView::busy_endpoints_transform(double alpha,
                                                                     double beta) const {
  std::vector<double> h(b_.size());
  for (std::size_t k = 0; k < b_.size(); ++k)
    h[k] = cycle_window_weight(b_[k], alpha, beta);
  return ratio_estimate(h, b_);
}

std::pair<double, double> LengthBiasedView::idle_endpoints_transform(double alpha,
                                                                     double beta) const {
  std::vector<double> h(i_.size());
  for (std::size_t k = 0; k < i_.size(); ++k)
    h[k] = cycle_window_weight(i_[k], alpha, beta);
  return ratio_estimate(h, i_);
}

void write_sample_csv(const CycleStats& s, const std::string& path) {
  csv::Writer w(path);
  w.comment("fluidq samples v" + std::string(kVersion));
  w.comment("model=" + s.config.model.describe());
  w.comment("seed=" + std::to_string(s.config.seed));
  w.comment("epsilon=" + csv::format(s.config.epsilon));
  w.comment("n_cycles=" + std::to_string(s.config.n_cycles));
  w.comment("censored=" + std::to_string(s.censored));
  w.header({"b", "i", "q_star"});
  for (const auto& c : s.samples) w.row({c.b, c.i, c.q_star});
}

}  // namespace fluidq
