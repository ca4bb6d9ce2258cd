#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace fluidq {

// Spectrally negative, bounded-variation Levy process
//   Lambda_t = delta * t - (pure-jump subordinator part),
// described through its Laplace exponent psi(theta) = log E e^{theta Lambda_1}.
// The built-in kinds model the inverse local time of reflected Brownian motion
// with drift -c and of a tempered-stable-plus-compound-Poisson subordinator;
// both have unit drift.

enum class ModelKind { BrownianLocalTime, TemperedStableLocalTime, Custom };

struct BrownianParams {
  double c = 0.5;  // reflected-BM drift magnitude; queue laws need 0 < c < 1
};

struct TemperedStableParams {
  double phi = 1.0;    // compound-Poisson rate, also Phi(0)
  double gamma = 1.0;  // tempering / gamma-jump rate
  double nu = 0.5;     // stability-type index in (0,1)
};

struct CustomParams {
  std::function<double(double)> psi;  // Laplace exponent on [0, inf)
  double drift = 1.0;
  // Optional complex extension of psi, enables Talbot-based scale functions.
  std::function<std::complex<double>(std::complex<double>)> psi_complex;
};

class LevyModel {
 public:
  static LevyModel brownian(double c);
  static LevyModel tempered_stable(double phi, double gamma, double nu);
  static LevyModel custom(std::function<double(double)> psi, double drift,
                          std::function<std::complex<double>(std::complex<double>)>
                              psi_complex = {});

  ModelKind kind() const { return kind_; }
  double drift() const { return drift_; }
  bool has_complex_psi() const;

  const BrownianParams& brownian_params() const;
  const TemperedStableParams& tempered_stable_params() const;
  const CustomParams& custom_params() const;

  std::string describe() const;

 private:
  LevyModel() = default;
  ModelKind kind_ = ModelKind::Custom;
  double drift_ = 1.0;
  BrownianParams bp_;
  TemperedStableParams tp_;
  CustomParams cp_;
};

/// Laplace exponent psi(theta), theta >= 0.  psi(0) = 0 exactly; convex.
double psi(const LevyModel& m, double theta);

/// psi on the complex plane (principal branches).  Throws if the model is
/// Custom without a complex extension.
std::complex<double> psi_complex(const LevyModel& m, std::complex<double> theta);

/// Derivative psi'(theta); closed form for the built-in kinds, fourth-order
/// finite difference with step max(1e-6, 1e-6*theta) for Custom models.
double psi_prime(const LevyModel& m, double theta);

/// Right inverse Phi(q) = sup{theta >= 0 : psi(theta) = q}, q >= 0.
/// Closed form where available, otherwise the bracketing root finder.
double phi_inverse(const LevyModel& m, double q);

/// Bracketing + safeguarded-Newton root finder for Phi(q); kept independent of
/// the closed forms as a cross-check path.  Relative tolerance 1e-12; throws
/// std::runtime_error with bracket diagnostics on convergence failure.
double phi_inverse_root(const LevyModel& m, double q);

/// Model validity checks; violations returned as data, empty means valid.
std::vector<std::string> validate(const LevyModel& m);

/// Throws std::domain_error listing the violations when the model cannot be
/// used for queue laws.
void require_valid_for_queue_laws(const LevyModel& m);

}  // namespace fluidq
