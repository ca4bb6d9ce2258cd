#include <doctest.h>

#include <cmath>
#include <random>

#include "fluidq/levy_model.hpp"

using namespace fluidq;

TEST_SUITE_BEGIN("levy_model");

TEST_CASE("psi anchors") {
  LevyModel b = LevyModel::brownian(0.5);
  CHECK(psi(b, 0.0) == 0.0);
  // Phi(0) = 2(1-c) is a root of psi
  CHECK(psi(b, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  LevyModel ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  CHECK(psi(ts, 0.0) == 0.0);
  CHECK(psi(ts, 1.0) == doctest::Approx(0.0).epsilon(1e-15));  // Phi(0) = phi
  CHECK_THROWS_AS(psi(b, -0.1), std::domain_error);
}

TEST_CASE("psi_prime anchors") {
  LevyModel b = LevyModel::brownian(0.5);
  CHECK(psi_prime(b, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));  // 1 - 1/c
  LevyModel ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  CHECK(psi_prime(ts, 0.0) == doctest::Approx(-0.25).epsilon(1e-14));  // -phi nu/gamma
  // bounded-variation drift asymptote
  CHECK(psi_prime(b, 1e12) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(psi_prime(ts, 1e12) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(psi_prime(b, -1.0), std::domain_error);
}

TEST_CASE("psi convexity") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> th(0.0, 8.0);
  std::uniform_real_distribution<double> tt(0.0, 1.0);
  for (const LevyModel& m :
       {LevyModel::brownian(0.3), LevyModel::tempered_stable(1.0, 2.0, 0.5)}) {
    for (int k = 0; k < 300; ++k) {
      const double t1 = th(gen), t2 = th(gen), t = tt(gen);
      const double lhs = psi(m, t * t1 + (1.0 - t) * t2);
      const double rhs = t * psi(m, t1) + (1.0 - t) * psi(m, t2);
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("phi_inverse closed form and right-inverse round trips") {
  for (double c : {0.3, 0.5, 0.9}) {
    LevyModel m = LevyModel::brownian(c);
    CHECK(phi_inverse(m, 0.0) == doctest::Approx(2.0 * (1.0 - c)).epsilon(1e-14));
    for (double q = 0.0; q <= 10.0; q += 0.7) {
      const double ph = phi_inverse(m, q);
      CHECK(psi(m, ph) == doctest::Approx(q).epsilon(1e-10));
    }
    // Phi(psi(theta)) = theta right of Phi(0)
    for (double theta = phi_inverse(m, 0.0); theta < 12.0; theta += 0.9)
      CHECK(phi_inverse(m, psi(m, theta)) == doctest::Approx(theta).epsilon(1e-10));
  }
  LevyModel ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
  CHECK(phi_inverse(ts, 0.0) == 1.0);
  for (double q = 0.0; q <= 10.0; q += 0.7)
    CHECK(psi(ts, phi_inverse(ts, q)) == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("root finder agrees with the Brownian closed form") {
  for (double c : {0.2, 0.5, 0.85}) {
    LevyModel m = LevyModel::brownian(c);
    for (double q : {0.0, 0.1, 1.0, 4.0}) {
      const double closed = phi_inverse(m, q);
      const double rooted = phi_inverse_root(m, q);
      CHECK(rooted == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("custom model: psi wrapper reproduces the Brownian one") {
  const double c = 0.4;
  LevyModel ref = LevyModel::brownian(c);
  LevyModel cm = LevyModel::custom(
      [c](double t) { return t - std::sqrt(2.0 * t + c * c) + c; }, 1.0);
  CHECK(validate(cm).empty());
  CHECK(psi(cm, 2.0) == doctest::Approx(psi(ref, 2.0)).epsilon(1e-14));
  // fourth-order finite difference matches the closed-form derivative
  for (double t : {0.0, 0.5, 3.0})
    CHECK(psi_prime(cm, t) == doctest::Approx(psi_prime(ref, t)).epsilon(1e-8));
  CHECK(phi_inverse(cm, 0.7) == doctest::Approx(phi_inverse(ref, 0.7)).epsilon(1e-10));
}

TEST_CASE("validate flags assumption violations") {
  CHECK(validate(LevyModel::brownian(0.5)).empty());
  auto v = validate(LevyModel::brownian(1.2));
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "c must lie in (0,1) for queue laws");
  auto v2 = validate(LevyModel::tempered_stable(0.0, 2.0, 0.5));
  REQUIRE(v2.size() == 1);
  CHECK(v2[0] == "phi must be > 0");
  CHECK(!validate(LevyModel::tempered_stable(1.0, -1.0, 0.5)).empty());
  CHECK(!validate(LevyModel::tempered_stable(1.0, 2.0, 1.5)).empty());
  // mis-declared drift is caught by the large-theta slope check
  const double c = 0.4;
  LevyModel bad = LevyModel::custom(
      [c](double t) { return t - std::sqrt(2.0 * t + c * c) + c; }, 0.9);
  bool drift_flagged = false;
  for (const auto& msg : validate(bad))
    drift_flagged = drift_flagged || msg.find("drift inconsistent") != std::string::npos;
  CHECK(drift_flagged);
  CHECK_THROWS_AS(require_valid_for_queue_laws(LevyModel::brownian(1.2)), std::domain_error);
}

TEST_SUITE_END();
