#pragma once

#include <complex>
#include <functional>

namespace fluidq {

/// Complementary error function, 2/sqrt(pi) * int_x^inf e^{-t^2} dt.
double erfc(double x);

/// Scaled complementary error function e^{x^2} erfc(x).
///
/// Stable for large positive x (continued fraction, no underflow) and for
/// negative x via erfcx(x) = 2 e^{x^2} - erfcx(-x).  Throws
/// std::overflow_error when the result exceeds the double range
/// (x negative with x^2 > log(DBL_MAX)).
double erfcx(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a,x)/Gamma(a), a > 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) = sum_n z^n / Gamma(alpha n + beta).
///
/// Power series for alpha >= 1 or |z| <= 5; for 0 < alpha < 1 and z > 5 the
/// exponential leading term plus a real integral over the Hankel-type branch
/// cut contribution.  Throws std::runtime_error if the series fails to
/// converge within the term budget and std::overflow_error when the value is
/// not representable.
double mittag_leffler(double alpha, double beta, double z);

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
};

/// Adaptive 7-15 Gauss-Kronrod quadrature of f over the finite interval [a, b].
/// Throws std::runtime_error when the requested tolerance is not met within
/// spec.max_subdivisions.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec = {});

/// int_0^b f(y) dy where f has an integrable y^{nu-1}-type singularity at the
/// origin, 0 < nu < 1.  Substitutes y = u^{1/nu}, which removes the
/// singularity, then integrates adaptively.
double integrate_singular_origin(const std::function<double(double)>& f, double b,
                                 double nu, const QuadratureSpec& spec = {});

/// Convolution value (f * g)(x) = int_0^x f(y) g(x - y) dy.
double convolve(const std::function<double(double)>& f,
                const std::function<double(double)>& g, double x,
                const QuadratureSpec& spec = {});

enum class InversionMethod { GaverStehfest, FixedTalbot };

struct InversionSpec {
  InversionMethod method = InversionMethod::FixedTalbot;
  int order = 32;  // Gaver-Stehfest: even number of terms >= 8; Talbot: nodes >= 16
};

/// A Laplace transform F(s).  Gaver-Stehfest samples it on the positive real
/// axis only; fixed Talbot needs it on a complex contour.
using LaplaceTransform = std::function<std::complex<double>(std::complex<double>)>;

/// Numerical inversion of a Laplace transform at x > 0.
///
/// The transform must be analytic to the right of its abscissa of convergence;
/// singularities must lie strictly left of Re s = 2*order/(5x) for Talbot and
/// left of ln(2)/x for Gaver-Stehfest.  Each method is evaluated at two nearby
/// orders; std::runtime_error is thrown when they disagree beyond 1e-4
/// relative (method-instability diagnostic).
double laplace_invert(const LaplaceTransform& F, double x, const InversionSpec& spec = {});

/// Single-order inversion without the two-order instability check.
double laplace_invert_unchecked(const LaplaceTransform& F, double x, const InversionSpec& spec);

}  // namespace fluidq
