#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "fluidq/scale_fn.hpp"

using namespace fluidq;

TEST_SUITE_BEGIN("scale_fn");

namespace {

// independent oracle: high-resolution trapezoid of int_0^x f(y) g(x-y) dy
double trapezoid_conv(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, double x, int n) {
  double sum = 0.5 * (f(0.0) * g(x) + f(x) * g(0.0));
  for (int k = 1; k < n; ++k) {
    const double y = x * k / n;
    sum += f(y) * g(x - y);
  }
  return sum * x / n;
}

}  // namespace

TEST_CASE("w_brownian anchors") {
  // W(0) = 1 for every alpha and c (unit drift)
  for (double a : {0.0, 0.3, 2.0})
    for (double c : {0.0, 0.5, 1.0}) CHECK(w_brownian(0.0, a, c) == 1.0);
  CHECK(w_brownian(-1.0, 0.0, 0.5) == 0.0);
  CHECK(w_brownian(1.0, 0.0, 0.5) ==
        doctest::Approx(6.918580620445093750758761).epsilon(1e-13));
  // c = 0: W_0(x) = e^{2x} Erfc(-sqrt(2x))
  CHECK(w_brownian(1.0, 0.0, 0.0) ==
        doctest::Approx(std::exp(2.0) * fluidq::erfc(-std::sqrt(2.0))).epsilon(1e-13));
  CHECK(w_brownian(1.0, 0.0, 0.0) ==
        doctest::Approx(14.44190819541495924160656).epsilon(1e-13));
  // 40-digit references for alpha > 0
  CHECK(w_brownian(2.0, 0.3, 0.5) == doctest::Approx(65.0182138079486884672).epsilon(1e-13));
  CHECK(w_brownian(1.0, 0.2, 0.5) == doctest::Approx(9.620504453711773490927).epsilon(1e-13));
}

TEST_CASE("w_brownian c=1 limit branch") {
  CHECK(w_brownian_c1(0.0) == 1.0);
  CHECK(w_brownian(1.5, 0.0, 1.0) == doctest::Approx(w_brownian_c1(1.5)).epsilon(1e-15));
  // limit continuity: c -> 1 approaches the dispatched branch
  CHECK(w_brownian(1.5, 0.0, 1.0 - 1e-4) ==
        doctest::Approx(w_brownian_c1(1.5)).epsilon(1e-3));
  // alpha > 0 at c = 1 uses the general formula, no limit needed
  CHECK(w_brownian(1.0, 0.5, 1.0) > 1.0);
}

TEST_CASE("w_tempered_stable anchors") {
  TemperedStableParams p{1.0, 2.0, 0.5};
  CHECK(w_tempered_stable(0.0, p) == 1.0);
  CHECK(w_tempered_stable(0.5, p) == doctest::Approx(4.963022165281228).epsilon(1e-9));
  CHECK(w_tempered_stable(1.0, p) == doctest::Approx(10.80899515954710).epsilon(1e-9));
  CHECK(w_tempered_stable(3.0, p) == doctest::Approx(105.4559046148570).epsilon(1e-9));
  // large-x asymptote W(x) ~ e^{phi x}/psi'(phi), ratio within 1e-3 at x = 30
  LevyModel m = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  const double psip_phi = psi_prime(m, 1.0);
  ScaleFunction w = ScaleFunction::make(m, 0.0);
  CHECK(w.tilted_value(30.0) * psip_phi == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("engine cross-agreement") {
  for (double c : {0.3, 0.5, 0.9}) {
    LevyModel m = LevyModel::brownian(c);
    for (double a : {0.0, 0.1, 1.0}) {
      ScaleFunction closed(m, a, ScaleEngine::ClosedFormBrownian);
      ScaleFunction inv(m, a, ScaleEngine::NumericInversion);
      for (double x : {0.05, 0.3, 1.0, 3.0, 10.0})
        CHECK(inv(x) == doctest::Approx(closed(x)).epsilon(1e-5));
    }
  }
  LevyModel ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  ScaleFunction ml(ts, 0.0, ScaleEngine::MittagLefflerTS);
  ScaleFunction tsi(ts, 0.0, ScaleEngine::NumericInversion);
  for (double x : {0.1, 0.5, 1.0, 2.5, 5.0})
    CHECK(tsi(x) == doctest::Approx(ml(x)).epsilon(1e-5));
}

TEST_CASE("w_generic equals the closed form for a q > 0 tilt") {
  LevyModel m = LevyModel::brownian(0.5);
  CHECK(w_generic(2.0, m, 0.3) == doctest::Approx(w_brownian(2.0, 0.3, 0.5)).epsilon(1e-6));
  CHECK(w_generic(0.0, m, 0.3) == 1.0);  // 1/drift without inversion
}

TEST_CASE("Laplace identity on a theta grid") {
  // int_0^inf e^{-theta x} W^{(q)}(x) dx = 1/(psi(theta) - q)
  LevyModel m = LevyModel::brownian(0.5);
  for (double q : {0.0, 0.3}) {
    ScaleFunction w = ScaleFunction::make(m, q);
    for (double off : {0.15, 0.8, 2.5}) {
      const double theta = w.phi_q() + off;
      const double T = 45.0 / off;  // e^{-off T} ~ 3e-20: tail below 1e-9 relative
      QuadratureSpec qs;
      qs.max_subdivisions = 4000;
      const double got = integrate(
          [&](double x) { return std::exp(-(theta - w.phi_q()) * x) * w.tilted_value(x); },
          0.0, T, qs);
      CHECK(got == doctest::Approx(1.0 / (psi(m, theta) - q)).epsilon(1e-6));
    }
  }
}

TEST_CASE("monotonicity on random grids") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (const LevyModel& m :
       {LevyModel::brownian(0.5), LevyModel::tempered_stable(1.0, 2.0, 0.5)}) {
    ScaleFunction w = ScaleFunction::make(m, 0.4 * u(gen) / 8.0);
    std::vector<double> xs(40);
    for (auto& x : xs) x = u(gen);
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); ++k)
      CHECK(w(xs[k]) <= w(xs[k + 1]) * (1.0 + 1e-12));
  }
}

TEST_CASE("tilted scale function") {
  LevyModel m = LevyModel::brownian(0.5);
  // beta = 0 is the identity tilt
  CHECK(w_tilted(1.3, 0.2, 0.0, m) == doctest::Approx(w_brownian(1.3, 0.2, 0.5)).epsilon(1e-14));
  // W^{(q)}_beta(0) = 1/drift irrespective of q and beta
  CHECK(w_tilted(0.0, 0.7, 0.4, m) == 1.0);
  // product structure
  CHECK(w_tilted(1.0, 0.2, 0.1, m) ==
        doctest::Approx(std::exp(-0.1) * w_brownian(1.0, 0.2, 0.5)).epsilon(1e-14));
}

TEST_CASE("z_tilted") {
  LevyModel m = LevyModel::brownian(0.5);
  CHECK(z_tilted(0.0, 0.7, 0.2, m) == 1.0);
  CHECK(z_tilted(2.0, 0.0, 0.2, m) == 1.0);
  // quadrature oracle at beta = 0: Z = 1 + q int_0^1 W^{(q)}
  const double q = 0.2;
  auto w = [&](double t) { return w_brownian(t, q, 0.5); };
  double acc = 0.5 * (w(0.0) + w(1.0));
  const int n = 200000;
  for (int k = 1; k < n; ++k) acc += w(static_cast<double>(k) / n);
  const double oracle = 1.0 + q * acc / n;
  CHECK(z_tilted(1.0, q, 0.0, m) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("alpha-derivative at zero is the self-convolution of W") {
  LevyModel m = LevyModel::brownian(0.5);
  CHECK(w_alpha_derivative_at_zero(0.0, m) == 0.0);
  // 40-digit references
  CHECK(w_alpha_derivative_at_zero(1.0, m) ==
        doctest::Approx(11.57636579282021603974).epsilon(1e-10));
  CHECK(w_alpha_derivative_at_zero(2.0, m) ==
        doctest::Approx(83.75593582331868254281).epsilon(1e-10));
  // forward-difference oracle
  const double h = 1e-6;
  for (double x : {0.5, 1.0, 2.0}) {
    const double fd = (w_brownian(x, h, 0.5) - w_brownian(x, 0.0, 0.5)) / h;
    CHECK(w_alpha_derivative_at_zero(x, m) == doctest::Approx(fd).epsilon(1e-4));
  }
  // high-resolution trapezoid oracle for the quadrature route
  auto w = [&](double y) { return w_brownian(y, 0.0, 0.5); };
  const double trap = trapezoid_conv(w, w, 1.0, 1000000);
  CHECK(w_alpha_derivative_at_zero(1.0, m) == doctest::Approx(trap).epsilon(1e-8));
}

TEST_CASE("entire-function series: W^(a) = sum a^k W^{*(k+1)}") {
  // convolution powers on a uniform grid, truncated at K = 8
  const double c = 0.5, xmax = 2.0;
  const int n = 2048, K = 8;
  std::vector<std::vector<double>> powers(K + 1, std::vector<double>(n + 1));
  const double h = xmax / n;
  for (int i = 0; i <= n; ++i) powers[0][i] = w_brownian(i * h, 0.0, c);
  for (int k = 1; k <= K; ++k) {
    for (int i = 0; i <= n; ++i) {
      double acc = 0.5 * (powers[k - 1][0] * powers[0][i] + powers[k - 1][i] * powers[0][0]);
      for (int j = 1; j < i; ++j) acc += powers[k - 1][j] * powers[0][i - j];
      powers[k][i] = acc * h;
    }
  }
  for (double a : {0.1, 0.3, 0.5}) {
    for (int i : {n / 4, n / 2, n}) {
      double series = 0.0, apow = 1.0;
      for (int k = 0; k <= K; ++k) {
        series += apow * powers[k][i];
        apow *= a;
      }
      CHECK(series == doctest::Approx(w_brownian(i * h, a, c)).epsilon(1e-4));
    }
  }
}

TEST_CASE("gridded interpolant is exact at nodes and monotone between") {
  LevyModel m = LevyModel::brownian(0.5);
  ScaleFunction w = ScaleFunction::make(m, 0.1);
  std::vector<double> grid;
  for (double x = 0.0; x <= 4.0001; x += 0.25) grid.push_back(x);
  GriddedScaleFunction g(w, grid);
  for (double x : grid) CHECK(g(x) == doctest::Approx(w(x)).epsilon(1e-14));
  double prev = 0.0;
  for (double x = 0.0; x <= 4.0; x += 0.01) {
    const double v = g(x);
    CHECK(v >= prev - 1e-12);
    // W has a sqrt(x) kink at 0, so interpolation quality is only claimed
    // from the second node onwards
    if (x >= 0.25) CHECK(v == doctest::Approx(w(x)).epsilon(1e-2));
    prev = v;
  }
}

TEST_CASE("direct inversion of 1/psi reproduces the closed-form W") {
  // untilted transform: abscissa Phi(0) = 1 stays inside the Talbot contour
  // for x <= 5
  LevyModel m = LevyModel::brownian(0.5);
  auto F = [&](std::complex<double> l) { return 1.0 / psi_complex(m, l); };
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0})
    CHECK(laplace_invert(F, x) == doctest::Approx(w_brownian(x, 0.0, 0.5)).epsilon(1e-5));
}

TEST_CASE("concurrent evaluation of a shared inversion-engine evaluator") {
  LevyModel m = LevyModel::brownian(0.5);
  ScaleFunction w(m, 0.2, ScaleEngine::NumericInversion);
  std::vector<double> xs;
  for (int k = 1; k <= 64; ++k) xs.push_back(0.1 * k);
  std::vector<double> serial(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) serial[k] = w(xs[k]);

  ScaleFunction shared(m, 0.2, ScaleEngine::NumericInversion);
  std::vector<double> parallel(xs.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t k = t; k < xs.size(); k += 4) parallel[k] = shared(xs[k]);
    });
  for (auto& th : pool) th.join();
  for (std::size_t k = 0; k < xs.size(); ++k)
    CHECK(parallel[k] == doctest::Approx(serial[k]).epsilon(1e-12));
}

TEST_CASE("scale function input validation") {
  LevyModel m = LevyModel::brownian(0.5);
  CHECK_THROWS_AS(ScaleFunction(m, -0.1, ScaleEngine::ClosedFormBrownian), std::domain_error);
  LevyModel ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  CHECK_THROWS_AS(ScaleFunction(ts, 0.0, ScaleEngine::ClosedFormBrownian),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScaleFunction(ts, 0.5, ScaleEngine::MittagLefflerTS), std::invalid_argument);
  CHECK_THROWS_AS(w_brownian(1.0, -0.5, 0.5), std::domain_error);
}

TEST_SUITE_END();
