#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "fluidq/csv.hpp"
#include "fluidq/excursion_laws.hpp"
#include "fluidq/mc_oracle.hpp"
#include "fluidq/special_fns.hpp"

using namespace fluidq;

TEST_SUITE_BEGIN("mc_oracle");

namespace {

SimConfig brownian_config(std::uint64_t n, std::uint64_t seed, int workers = 2) {
  SimConfig cfg;
  cfg.model = LevyModel::brownian(0.5);
  cfg.n_cycles = n;
  cfg.epsilon = 1e-6;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

double brownian_levy_density(double u, double c) {
  return std::exp(-0.5 * c * c * u) / std::sqrt(2.0 * std::numbers::pi * u * u * u);
}

}  // namespace

TEST_CASE("jump sampler rates match quadrature oracles") {
  const double c = 0.5, eps = 1e-6;
  JumpSampler js(LevyModel::brownian(c), eps);
  QuadratureSpec qs{1e-13, 1e-11, 8000};
  const double rate_oracle =
      integrate([&](double u) { return brownian_levy_density(u, c); }, eps, 1.0, qs) +
      integrate([&](double u) { return brownian_levy_density(u, c); }, 1.0, 400.0, qs);
  CHECK(js.rate() == doctest::Approx(rate_oracle).epsilon(1e-9));
  const double beps_oracle =
      integrate([&](double u) { return u * brownian_levy_density(u, c); }, 0.0, eps, qs);
  CHECK(js.mean_small_jump() == doctest::Approx(beps_oracle).epsilon(1e-8));
  const double var_oracle =
      integrate([&](double u) { return u * u * brownian_levy_density(u, c); }, 0.0, eps, qs);
  CHECK(js.small_jump_variance() == doctest::Approx(var_oracle).epsilon(1e-8));
  CHECK(js.inversion_residual() < 1e-4);
}

TEST_CASE("tempered-stable jump decomposition") {
  const double phi = 1.0, gamma = 2.0, nu = 0.5, eps = 1e-6;
  LevyModel m = LevyModel::tempered_stable(phi, gamma, nu);
  JumpSampler js(m, eps);
  // gamma-component total rate is phi: its density term integrates to phi
  const double gnu = std::pow(gamma, nu) / std::tgamma(nu);
  const double cp_total = integrate_singular_origin(
      [&](double u) { return phi * gnu * std::pow(u, nu - 1.0) * std::exp(-gamma * u); },
      60.0, nu, {1e-13, 1e-11, 8000});
  CHECK(cp_total == doctest::Approx(phi).epsilon(1e-9));
  // quadrature oracle for the full restricted rate via the two densities
  auto density = [&](double u) {
    const double ia = gnu * std::exp(-gamma * u) *
                      ((1.0 - nu) * std::pow(u, nu - 2.0) + gamma * std::pow(u, nu - 1.0));
    const double cp = phi * gnu * std::pow(u, nu - 1.0) * std::exp(-gamma * u);
    return ia + cp;
  };
  QuadratureSpec qs{1e-13, 1e-11, 8000};
  double rate_oracle = integrate(density, eps, 1.0, qs) + integrate(density, 1.0, 60.0, qs);
  CHECK(js.rate() == doctest::Approx(rate_oracle).epsilon(1e-8));
  // b_eps oracle (integrable singularity at the origin)
  const double beps_oracle =
      integrate_singular_origin([&](double u) { return u * density(u); }, eps, nu, qs);
  CHECK(js.mean_small_jump() == doctest::Approx(beps_oracle).epsilon(1e-7));
}

TEST_CASE("sampled sizes match the restricted measure") {
  const double c = 0.5, eps = 1e-6;
  JumpSampler js(LevyModel::brownian(c), eps);
  Xoshiro256 rng(4242, 0);
  const int n = 400000;
  double mean = 0.0, sq = 0.0;
  int over = 0;
  for (int k = 0; k < n; ++k) {
    const double u = js.sample(rng);
    CHECK(u >= eps);
    mean += u;
    sq += u * u;
    if (u > 0.25) ++over;
  }
  mean /= n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  QuadratureSpec qs{1e-13, 1e-11, 8000};
  const double mean_oracle =
      integrate([&](double u) { return u * brownian_levy_density(u, c); }, eps, 400.0, qs) /
      js.rate();
  CHECK(std::abs(mean - mean_oracle) < 3.0 * se);
  // tail probability at a fixed level
  const double p_oracle = js.tail(0.25) / js.rate();
  const double p_hat = static_cast<double>(over) / n;
  const double p_se = std::sqrt(p_oracle * (1.0 - p_oracle) / n);
  CHECK(std::abs(p_hat - p_oracle) < 3.0 * p_se);
}

TEST_CASE("simulated means match the analytic busy/idle means") {
  SimConfig cfg = brownian_config(150000, 31);
  CycleStats stats = simulate_cycles(cfg);
  CHECK(stats.censored == 0);
  CHECK(stats.samples.size() == cfg.n_cycles);
  CHECK(std::abs(stats.mean_b() - busy_mean(cfg.model)) < 3.0 * stats.se_b());
  CHECK(std::abs(stats.mean_i() - idle_mean(cfg.model)) < 3.0 * stats.se_i());

  SimConfig ts = cfg;
  ts.model = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  ts.n_cycles = 80000;
  CycleStats tstats = simulate_cycles(ts);
  CHECK(std::abs(tstats.mean_b() - 1.0) < 3.0 * tstats.se_b());
  CHECK(std::abs(tstats.mean_i() - 0.25) < 3.0 * tstats.se_i());
  // triple law through the inversion-engine scale function (alpha > 0)
  const auto [est, se] = empirical_transform(tstats, 0.2, 0.1, 1.0);
  CHECK(std::abs(est - triple_law(0.2, 0.1, 1.0, ts.model)) < 3.0 * se);
}

TEST_CASE("per-sample positivity") {
  CycleStats stats = simulate_cycles(brownian_config(5000, 77, 1));
  for (const auto& s : stats.samples) {
    CHECK(s.b > 0.0);
    CHECK(s.i > 0.0);
    CHECK(s.q_star > 0.0);
  }
}

TEST_CASE("first-passage structure: replayed path reproduces (B, I, Q*)") {
  // independent replay of the cycle walk on the same per-cycle stream; checks
  // the structural equivalence {Q* < x} = {no level crossing of x before B}
  SimConfig cfg = brownian_config(40, 7, 1);
  CycleStats stats = simulate_cycles(cfg);
  JumpSampler js(cfg.model, cfg.epsilon);
  const double slope = cfg.model.drift() - js.mean_small_jump();
  for (std::uint64_t k = 0; k < cfg.n_cycles; ++k) {
    Xoshiro256 rng(cfg.seed, k);
    double t = 0.0, lam = 0.0, peak = 0.0;
    const double level = 0.2;  // probe level for the crossing equivalence
    double crossing_time = std::numeric_limits<double>::infinity();
    for (;;) {
      const double dt = -std::log(rng.next_double()) / js.rate();
      const double pre = lam + slope * dt;
      if (pre > level && !(crossing_time < t + dt))
        crossing_time = t + (level - lam) / slope;  // upward crossings are linear in time
      if (pre > peak) peak = pre;
      lam = pre - js.sample(rng);
      t += dt;
      if (lam < 0.0) break;
    }
    CHECK(stats.samples[k].b == t);
    CHECK(stats.samples[k].i == -lam);
    CHECK(stats.samples[k].q_star == peak);
    CHECK(peak >= 0.0);
    // {Q* >= level} iff the path crossed the level strictly before B
    CHECK((peak >= level) == (crossing_time <= t));
  }
}

TEST_CASE("reproducibility and worker invariance") {
  CycleStats a = simulate_cycles(brownian_config(4000, 9, 2));
  CycleStats b = simulate_cycles(brownian_config(4000, 9, 2));
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].b == b.samples[k].b);
    CHECK(a.samples[k].i == b.samples[k].i);
    CHECK(a.samples[k].q_star == b.samples[k].q_star);
  }
  // streams are indexed by (seed, cycle), so any worker count reproduces the
  // same cycle values
  CycleStats c = simulate_cycles(brownian_config(4000, 9, 1));
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    CHECK(a.samples[k].q_star == c.samples[k].q_star);
  // different seeds decorrelate
  CycleStats d = simulate_cycles(brownian_config(4000, 10, 2));
  CHECK(d.samples[0].b != a.samples[0].b);
}

TEST_CASE("epsilon refinement leaves the mean within combined standard errors") {
  SimConfig cfg = brownian_config(100000, 5);
  CycleStats coarse = simulate_cycles(cfg);
  cfg.epsilon = 5e-7;
  cfg.seed = 6;  // independent draw at the finer truncation
  CycleStats fine = simulate_cycles(cfg);
  const double se = std::hypot(coarse.se_b(), fine.se_b());
  CHECK(std::abs(coarse.mean_b() - fine.mean_b()) < 3.0 * se);
}

TEST_CASE("empirical transform") {
  CycleStats stats = simulate_cycles(brownian_config(120000, 13));
  const auto [full, se0] = empirical_transform(stats, 0.0, 0.0,
                                               std::numeric_limits<double>::infinity());
  CHECK(full == 1.0);
  CHECK(se0 == 0.0);
  // reduces to the empirical CDF at alpha = beta = 0
  const auto [cdf1, cse] = empirical_transform(stats, 0.0, 0.0, 1.0);
  CHECK(std::abs(cdf1 - qstar_cdf(1.0, stats.config.model)) < 3.0 * cse + 1e-9);
  // cross-module agreement with the analytic triple law
  const auto [est, se] = empirical_transform(stats, 0.2, 0.1, 1.0);
  CHECK(std::abs(est - triple_law(0.2, 0.1, 1.0, stats.config.model)) < 3.0 * se);
}

TEST_CASE("length-biased view") {
  CycleStats stats = simulate_cycles(brownian_config(120000, 23));
  LengthBiasedView view(stats);
  CHECK(view.size() == stats.samples.size());
  // normalized weights b_k / mean(b) sum to the sample count
  CHECK(view.total_weight() / stats.mean_b() ==
        doctest::Approx(static_cast<double>(view.size())).epsilon(1e-12));
  // weighted CDF vs the conditional law of the maximum
  double sup = 0.0;
  for (double x = 0.2; x <= 6.0; x += 0.2)
    sup = std::max(sup, std::abs(view.qstar_cdf(x) -
                                 qstar_conditional_cdf(x, stats.config.model)));
  CHECK(sup < 0.015 * std::sqrt(1e6 / 120000.0));
  // observed busy mean (2-c)/(1-c)^2 = 6 at c = 1/2 (about 3 SE at this n)
  CHECK(view.mean_busy() == doctest::Approx(6.0).epsilon(0.1));
  // endpoint transforms vs the analytic Palm formulas
  const auto [eb, seb] = view.busy_endpoints_transform(0.3, 0.1);
  CHECK(std::abs(eb - busy_endpoints_transform(0.3, 0.1, stats.config.model)) < 3.0 * seb);
  const auto [ei, sei] = view.idle_endpoints_transform(0.3, 0.1);
  CHECK(std::abs(ei - idle_endpoints_transform(0.3, 0.1, stats.config.model)) < 3.0 * sei);
}

TEST_CASE("sample CSV round trip") {
  CycleStats stats = simulate_cycles(brownian_config(64, 3, 1));
  const std::string path = "mc_roundtrip_test.csv";
  write_sample_csv(stats, path);
  csv::Table t = csv::read(path);
  REQUIRE(t.columns == std::vector<std::string>{"b", "i", "q_star"});
  REQUIRE(t.rows.size() == stats.samples.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    CHECK(t.number(k, 0) == stats.samples[k].b);  // bit-exact decimal round trip
    CHECK(t.number(k, 1) == stats.samples[k].i);
    CHECK(t.number(k, 2) == stats.samples[k].q_star);
  }
  bool has_seed = false;
  for (const auto& cmt : t.comments) has_seed = has_seed || cmt.find("seed=3") == 0;
  CHECK(has_seed);
  std::remove(path.c_str());
}

TEST_CASE("configuration errors") {
  SimConfig cfg = brownian_config(10, 1);
  cfg.epsilon = 5.0;  // b_eps > 1: compensated drift goes negative
  CHECK_THROWS_AS(simulate_cycles(cfg), std::invalid_argument);
  SimConfig bad = brownian_config(10, 1);
  bad.model = LevyModel::brownian(1.5);
  CHECK_THROWS_AS(simulate_cycles(bad), std::domain_error);
  SimConfig zero = brownian_config(0, 1);
  CHECK_THROWS_AS(simulate_cycles(zero), std::invalid_argument);
  SimConfig cm = brownian_config(10, 1);
  cm.model = LevyModel::custom([](double t) { return t - std::sqrt(2.0 * t + 0.25) + 0.5; }, 1.0);
  CHECK_THROWS_AS(simulate_cycles(cm), std::invalid_argument);
}

TEST_SUITE_END();
