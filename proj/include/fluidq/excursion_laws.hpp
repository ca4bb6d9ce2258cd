#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fluidq/levy_model.hpp"
#include "fluidq/scale_fn.hpp"

namespace fluidq {

// Laws of the excursion triple (B, I, Q*) of the stationary fluid queue fed by
// the local-time process: B = busy period, I = idle period, Q* = maximum
// workload over the busy period.  "Typical" laws are under the Palm measure
// P_d (origin at the start of a busy period); "observed" laws condition on the
// origin lying in a busy (Q_0 > 0) or idle (Q_0 = 0) period.

/// E_d[e^{-alpha B - beta I} 1(Q* <= x)]
///   = 1 - (1/delta) [1 + (alpha - psi(beta)) int_0^x e^{-beta y} W^{(alpha)}(y) dy]
///                   / (e^{-beta x} W^{(alpha)}(x)).
/// x may be +infinity, in which case the closed-form limit is used.
double triple_law(double alpha, double beta, double x, const LevyModel& m);

/// E_d[e^{-alpha B - beta I}] = 1 - (1/delta) (alpha - psi(beta)) / (Phi(alpha) - beta);
/// the 0/0 point beta = Phi(alpha) is evaluated as 1 - psi'(beta)/delta.
double joint_bi_transform(double alpha, double beta, const LevyModel& m);

/// E_d[e^{-alpha B}] = 1 - alpha / (delta Phi(alpha)).
double busy_transform(double alpha, const LevyModel& m);

/// E_d[e^{-beta I}] = 1 - psi(beta) / (delta (beta - Phi(0))).
double idle_transform(double beta, const LevyModel& m);

double busy_mean(const LevyModel& m);   // E_d[B] = 1/(delta Phi(0))
double idle_mean(const LevyModel& m);   // E_d[I] = -psi'(0+)/(delta Phi(0))
double cycle_mean(const LevyModel& m);  // E_d[B + I]
double cycle_rate(const LevyModel& m);  // lambda = 1/E_d[B + I]

/// P_d(Q* <= x) = 1 - 1/(delta W(x)).
double qstar_cdf(double x, const LevyModel& m);

/// The exponential-tail asymptote (psi'(Phi(0))/delta) e^{-Phi(0) x}.
double qstar_tail_asymptote(double x, const LevyModel& m);

/// E[e^{-alpha d(0) + beta g(0)} | Q_0 = 0]: joint transform of the endpoints
/// of the idle period containing the origin.  The diagonal alpha = beta is the
/// analytic limit (derivative form); alpha or beta at Phi(0) is removable.
double idle_endpoints_transform(double alpha, double beta, const LevyModel& m);

/// E[e^{-alpha g(1) + beta d(0)} 1(Q* <= x) | Q_0 > 0]; x may be +infinity.
double busy_endpoints_max_transform(double alpha, double beta, double x,
                                    const LevyModel& m);

/// E[e^{-alpha g(1) + beta d(0)} | Q_0 > 0]
///   = (Phi(0)/(alpha - beta)) (alpha/Phi(alpha) - beta/Phi(beta)).
double busy_endpoints_transform(double alpha, double beta, const LevyModel& m);

/// P(Q* <= x | Q_0 > 0) = Phi(0) [W(x) int_0^x W - int_0^x W(x-y) W(y) dy] / W(x)^2.
double qstar_conditional_cdf(double x, const LevyModel& m);

// --- Brownian-kind closed forms (reflected Brownian motion with drift -c) ---

enum class BrownianDensityKind { BusyLength, G1, D0Idle, JointD0G1 };

/// Closed-form conditional densities: BusyLength = density of g(1)-d(0) given
/// Q_0 > 0; G1 = density of g(1) given Q_0 > 0; D0Idle = density of d(0)
/// given Q_0 = 0 (equals G1 with c replaced by 1-c).
double brownian_density(BrownianDensityKind which, double x, double c);

/// Joint density of (-d(0), g(1)) given Q_0 > 0 at (x, y); depends on x+y only.
double brownian_joint_density_d0_g1(double x, double y, double c);

/// Mean busy-period length given Q_0 > 0: (2-c)/(1-c)^2.
double brownian_observed_busy_mean(double c);

/// The endpoint-transform closed form
///   F(theta, beta; a) = 8a / ((s1+s2)(s1+2-a)(s2+2-a)),  s_i = sqrt(2.+a^2),
/// equal to E[e^{theta d(0) - beta g(1)} | Q_0 > 0] at a = 1-c and to
/// E[e^{theta g(0) - beta d(0)} | Q_0 = 0] at a = c.
double brownian_palm_endpoint_transform(double theta, double beta, double a);

// --- CLI-facing law registry -----------------------------------------------

enum class Law {
  TripleLaw,
  JointBI,
  BusyLT,
  IdleLT,
  QstarCDF,
  QstarTail,
  IdleEndpointsLT,
  BusyEndpointsMaxLT,
  BusyEndpointsLT,
  QstarCondCDF,
  BrownianDensity,
};

struct LawQuery {
  Law law = Law::QstarCDF;
  double alpha = 0.0;
  double beta = 0.0;
  double x = std::numeric_limits<double>::infinity();
  double y = 0.0;  // second coordinate of the joint density
  BrownianDensityKind density = BrownianDensityKind::BusyLength;
  std::optional<std::vector<double>> grid;  // sweep points for the law's primary variable
};

struct LawValue {
  double alpha, beta, x;
  double value;
  std::string meta;  // formula identifier + parameter echo
};

const char* law_name(Law law);
Law law_from_name(const std::string& name);
BrownianDensityKind density_kind_from_name(const std::string& name);

/// Evaluate a law query; with a grid, the grid sweeps x for CDF/density-type
/// laws and alpha for the pure transforms.
std::vector<LawValue> evaluate_law(const LawQuery& q, const LevyModel& m);

}  // namespace fluidq
