#include "fluidq/excursion_laws.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fluidq {

namespace {

constexpr double kDiagonalWindow = 1e-7;   // |alpha-beta| treated as the diagonal
constexpr double kRemovableWindow = 1e-7;  // |t - Phi(0)| treated as removable

double clamp_unit(double v) {
  if (v < 0.0 && v > -1e-12) return 0.0;
  if (v > 1.0 && v < 1.0 + 1e-12) return 1.0;
  return v;
}

// Fourth-order symmetric derivative of g at t with step h.
template <typename G>
double stencil_derivative(const G& g, double t, double h) {
  return (-g(t + 2 * h) + 8 * g(t + h) - 8 * g(t - h) + g(t - 2 * h)) / (12.0 * h);
}

}  // namespace

double triple_law(double alpha, double beta, double x, const LevyModel& m) {
  if (alpha < 0.0 || beta < 0.0 || x < 0.0)
    throw std::domain_error("triple_law: need alpha, beta, x >= 0");
  require_valid_for_queue_laws(m);
  if (std::isinf(x)) return joint_bi_transform(alpha, beta, m);
  if (x == 0.0) return 0.0;  // Q* > 0 almost surely
  ScaleFunction w = ScaleFunction::make(m, alpha);
  const double q = alpha - psi(m, beta);
  const double weighted = w.exp_weighted_integral(beta, x);
  const double denom = std::exp(-beta * x) * w(x);
  const double h = 1.0 - (1.0 + q * weighted) / (m.drift() * denom);
  return clamp_unit(h);
}

double joint_bi_transform(double alpha, double beta, const LevyModel& m) {
  if (alpha < 0.0 || beta < 0.0)
    throw std::domain_error("joint_bi_transform: need alpha, beta >= 0");
  require_valid_for_queue_laws(m);
  const double delta = m.drift();
  const double phi_a = phi_inverse(m, alpha);
  const double den = phi_a - beta;
  if (std::abs(den) <= kRemovableWindow * (1.0 + phi_a)) {
    // beta = Phi(alpha): removable exactly when alpha = psi(beta), where the
    // ratio tends to psi'(beta); otherwise the transform has a pole here.
    if (std::abs(alpha - psi(m, beta)) > 1e-4 * (1.0 + alpha))
      throw std::domain_error("joint_bi_transform: pole at beta = Phi(alpha)");
    return 1.0 - psi_prime(m, beta) / delta;
  }
  return 1.0 - (alpha - psi(m, beta)) / (delta * den);
}

double busy_transform(double alpha, const LevyModel& m) {
  return joint_bi_transform(alpha, 0.0, m);
}

double idle_transform(double beta, const LevyModel& m) {
  return joint_bi_transform(0.0, beta, m);
}

double busy_mean(const LevyModel& m) {
  require_valid_for_queue_laws(m);
  return 1.0 / (m.drift() * phi_inverse(m, 0.0));
}

double idle_mean(const LevyModel& m) {
  require_valid_for_queue_laws(m);
  return -psi_prime(m, 0.0) / (m.drift() * phi_inverse(m, 0.0));
}

double cycle_mean(const LevyModel& m) {
  require_valid_for_queue_laws(m);
  return (1.0 - psi_prime(m, 0.0)) / (m.drift() * phi_inverse(m, 0.0));
}

double cycle_rate(const LevyModel& m) { return 1.0 / cycle_mean(m); }

double qstar_cdf(double x, const LevyModel& m) {
  if (x < 0.0) throw std::domain_error("qstar_cdf: need x >= 0");
  require_valid_for_queue_laws(m);
  if (x == 0.0) return 0.0;  // W(0) = 1/delta, no atom at zero
  if (std::isinf(x)) return 1.0;
  ScaleFunction w = ScaleFunction::make(m, 0.0);
  // 1/(delta W(x)) = e^{-Phi(0) x} / (delta e^{-Phi(0) x} W(x)); the tilted
  // form stays representable for large x.
  const double tail = std::exp(-w.phi_q() * x) / (m.drift() * w.tilted_value(x));
  return clamp_unit(1.0 - tail);
}

double qstar_tail_asymptote(double x, const LevyModel& m) {
  if (x < 0.0) throw std::domain_error("qstar_tail_asymptote: need x >= 0");
  require_valid_for_queue_laws(m);
  const double phi0 = phi_inverse(m, 0.0);
  return psi_prime(m, phi0) / m.drift() * std::exp(-phi0 * x);
}

double idle_endpoints_transform(double alpha, double beta, const LevyModel& m) {
  if (alpha < 0.0 || beta < 0.0)
    throw std::domain_error("idle_endpoints_transform: need alpha, beta >= 0");
  require_valid_for_queue_laws(m);
  const double phi0 = phi_inverse(m, 0.0);
  const double C = phi0 / (-psi_prime(m, 0.0));
  auto G = [&](double t) {
    if (std::abs(t - phi0) <= kRemovableWindow) return psi_prime(m, phi0);
    return psi(m, t) / (t - phi0);
  };
  if (std::abs(alpha - beta) <= kDiagonalWindow * (1.0 + alpha)) {
    if (alpha == 0.0 && beta == 0.0) return 1.0;  // total probability
    const double tbar = 0.5 * (alpha + beta);
    const double h = std::min(1e-5, tbar / 2.5);
    return C * stencil_derivative(G, tbar, h);
  }
  return C * (G(alpha) - G(beta)) / (alpha - beta);
}

double busy_endpoints_transform(double alpha, double beta, const LevyModel& m) {
  if (alpha < 0.0 || beta < 0.0)
    throw std::domain_error("busy_endpoints_transform: need alpha, beta >= 0");
  require_valid_for_queue_laws(m);
  const double phi0 = phi_inverse(m, 0.0);
  auto D = [&](double t) { return (t == 0.0) ? 0.0 : t / phi_inverse(m, t); };
  if (std::abs(alpha - beta) <= kDiagonalWindow * (1.0 + alpha)) {
    if (alpha == 0.0 && beta == 0.0) return 1.0;  // Phi(0) * D'(0) = 1
    const double tbar = 0.5 * (alpha + beta);
    const double h = std::min(1e-5, tbar / 2.5);
    return phi0 * stencil_derivative(D, tbar, h);
  }
  return phi0 * (D(alpha) - D(beta)) / (alpha - beta);
}

double busy_endpoints_max_transform(double alpha, double beta, double x,
                                    const LevyModel& m) {
  if (alpha < 0.0 || beta < 0.0 || x < 0.0)
    throw std::domain_error("busy_endpoints_max_transform: need alpha, beta, x >= 0");
  require_valid_for_queue_laws(m);
  if (std::isinf(x)) return busy_endpoints_transform(alpha, beta, m);
  if (x == 0.0) return 0.0;
  if (alpha < 1e-9 && beta < 1e-9) return qstar_conditional_cdf(x, m);
  const double phi0 = phi_inverse(m, 0.0);
  auto K = [&](double t) {
    ScaleFunction w = ScaleFunction::make(m, t);
    return (1.0 + t * w.integral(x)) / w(x);
  };
  if (std::abs(alpha - beta) <= kDiagonalWindow * (1.0 + alpha)) {
    const double tbar = 0.5 * (alpha + beta);
    const double h = std::min(1e-5, tbar / 2.5);
    return phi0 * stencil_derivative(K, tbar, h);
  }
  return phi0 * (K(alpha) - K(beta)) / (alpha - beta);
}

double qstar_conditional_cdf(double x, const LevyModel& m) {
  if (x < 0.0) throw std::domain_error("qstar_conditional_cdf: need x >= 0");
  require_valid_for_queue_laws(m);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double phi0 = phi_inverse(m, 0.0);
  ScaleFunction w = ScaleFunction::make(m, 0.0);
  const double wx = w(x);
  const double i1 = w.integral(x);
  const double conv = integrate([&](double y) { return w(y) * w(x - y); }, 0.0, x);
  return clamp_unit(phi0 * (wx * i1 - conv) / (wx * wx));
}

// ---------------------------------------------------------------------------
// Brownian closed forms
// ---------------------------------------------------------------------------

namespace {

void check_brownian_c(double c) {
  if (!(c > 0.0 && c < 1.0))
    throw std::domain_error("brownian density: need c in (0,1)");
}

}  // namespace

double brownian_density(BrownianDensityKind which, double x, double c) {
  check_brownian_c(c);
  if (x < 0.0) throw std::domain_error("brownian_density: need x >= 0");
  const double s = std::sqrt(0.5 * x);
  switch (which) {
    case BrownianDensityKind::BusyLength:
      // f_{g-b}(v) = 2(1-c) e^{-(1-c)^2 v/2} (sqrt(2v/pi) - (1+c) v e^{(1+c)^2 v/2} Erfc((1+c) sqrt(v/2)))
      return 2.0 * (1.0 - c) * std::exp(-0.5 * (1.0 - c) * (1.0 - c) * x) *
             (std::sqrt(2.0 * x / std::numbers::pi) - (1.0 + c) * x * erfcx((1.0 + c) * s));
    case BrownianDensityKind::G1:
      return (1.0 - c) / c * std::exp(-0.5 * (1.0 - c) * (1.0 - c) * x) *
             ((1.0 + c) * erfcx((1.0 + c) * s) - (1.0 - c) * erfcx((1.0 - c) * s));
    case BrownianDensityKind::D0Idle:
      // density of d(0) given Q_0 = 0: the G1 form with c replaced by 1-c
      return c / (1.0 - c) * std::exp(-0.5 * c * c * x) *
             ((2.0 - c) * erfcx((2.0 - c) * s) - c * erfcx(c * s));
    case BrownianDensityKind::JointD0G1:
      throw std::invalid_argument("brownian_density: joint density needs two coordinates");
  }
  return 0.0;  // unreachable
}

double brownian_joint_density_d0_g1(double x, double y, const double c) {
  check_brownian_c(c);
  if (x < 0.0 || y < 0.0)
    throw std::domain_error("brownian_joint_density_d0_g1: need x, y >= 0");
  const double sum = x + y;
  if (sum == 0.0) return std::numeric_limits<double>::infinity();  // integrable pole
  return 2.0 * (1.0 - c) * std::exp(-0.5 * (1.0 - c) * (1.0 - c) * sum) *
         (std::sqrt(2.0 / (std::numbers::pi * sum)) -
          (1.0 + c) * erfcx((1.0 + c) * std::sqrt(0.5 * sum)));
}

double brownian_observed_busy_mean(double c) {
  check_brownian_c(c);
  return (2.0 - c) / ((1.0 - c) * (1.0 - c));
}

double brownian_palm_endpoint_transform(double theta, double beta, double a) {
  if (theta < 0.0 || beta < 0.0)
    throw std::domain_error("brownian_palm_endpoint_transform: need theta, beta >= 0");
  if (!(a > 0.0 && a < 1.0))
    throw std::domain_error("brownian_palm_endpoint_transform: need a in (0,1)");
  const double s1 = std::sqrt(2.0 * theta + a * a);
  const double s2 = std::sqrt(2.0 * beta + a * a);
  return 8.0 * a / ((s1 + s2) * (s1 + 2.0 - a) * (s2 + 2.0 - a));
}

// ---------------------------------------------------------------------------
// Law registry
// ---------------------------------------------------------------------------

const char* law_name(Law law) {
  switch (law) {
    case Law::TripleLaw: return "TripleLaw";
    case Law::JointBI: return "JointBI";
    case Law::BusyLT: return "BusyLT";
    case Law::IdleLT: return "IdleLT";
    case Law::QstarCDF: return "QstarCDF";
    case Law::QstarTail: return "QstarTail";
    case Law::IdleEndpointsLT: return "IdleEndpointsLT";
    case Law::BusyEndpointsMaxLT: return "BusyEndpointsMaxLT";
    case Law::BusyEndpointsLT: return "BusyEndpointsLT";
    case Law::QstarCondCDF: return "QstarCondCDF";
    case Law::BrownianDensity: return "BrownianDensity";
  }
  return "?";
}

Law law_from_name(const std::string& name) {
  static const std::pair<const char*, Law> table[] = {
      {"TripleLaw", Law::TripleLaw},
      {"JointBI", Law::JointBI},
      {"BusyLT", Law::BusyLT},
      {"IdleLT", Law::IdleLT},
      {"QstarCDF", Law::QstarCDF},
      {"QstarTail", Law::QstarTail},
      {"IdleEndpointsLT", Law::IdleEndpointsLT},
      {"BusyEndpointsMaxLT", Law::BusyEndpointsMaxLT},
      {"BusyEndpointsLT", Law::BusyEndpointsLT},
      {"QstarCondCDF", Law::QstarCondCDF},
      {"BrownianDensity", Law::BrownianDensity},
  };
  for (const auto& [n, l] : table)
    if (name == n) return l;
  throw std::invalid_argument("unknown law name: " + name);
}

BrownianDensityKind density_kind_from_name(const std::string& name) {
  if (name == "busy_length") return BrownianDensityKind::BusyLength;
  if (name == "g1") return BrownianDensityKind::G1;
  if (name == "d0_idle") return BrownianDensityKind::D0Idle;
  if (name == "joint_d0_g1") return BrownianDensityKind::JointD0G1;
  throw std::invalid_argument("unknown density kind: " + name);
}

namespace {

enum class SweepVar { X, Alpha, Beta };

SweepVar law_sweep_variable(Law law) {
  switch (law) {
    case Law::JointBI:
    case Law::BusyLT:
    case Law::IdleEndpointsLT:
    case Law::BusyEndpointsLT:
      return SweepVar::Alpha;
    case Law::IdleLT:
      return SweepVar::Beta;
    default:
      return SweepVar::X;
  }
}

double evaluate_one(const LawQuery& q, const LevyModel& m) {
  switch (q.law) {
    case Law::TripleLaw: return triple_law(q.alpha, q.beta, q.x, m);
    case Law::JointBI: return joint_bi_transform(q.alpha, q.beta, m);
    case Law::BusyLT: return busy_transform(q.alpha, m);
    case Law::IdleLT: return idle_transform(q.beta, m);
    case Law::QstarCDF: return qstar_cdf(q.x, m);
    case Law::QstarTail: return qstar_tail_asymptote(q.x, m);
    case Law::IdleEndpointsLT: return idle_endpoints_transform(q.alpha, q.beta, m);
    case Law::BusyEndpointsMaxLT:
      return busy_endpoints_max_transform(q.alpha, q.beta, q.x, m);
    case Law::BusyEndpointsLT: return busy_endpoints_transform(q.alpha, q.beta, m);
    case Law::QstarCondCDF: return qstar_conditional_cdf(q.x, m);
    case Law::BrownianDensity: {
      const double c = m.brownian_params().c;
      if (q.density == BrownianDensityKind::JointD0G1)
        return brownian_joint_density_d0_g1(q.x, q.y, c);
      return brownian_density(q.density, q.x, c);
    }
  }
  throw std::logic_error("evaluate_one: unknown law");
}

std::string meta_string(const LawQuery& q) {
  std::ostringstream os;
  os << law_name(q.law);
  if (q.law == Law::BrownianDensity) {
    const char* k = "busy_length";
    switch (q.density) {
      case BrownianDensityKind::BusyLength: k = "busy_length"; break;
      case BrownianDensityKind::G1: k = "g1"; break;
      case BrownianDensityKind::D0Idle: k = "d0_idle"; break;
      case BrownianDensityKind::JointD0G1: k = "joint_d0_g1"; break;
    }
    os << ":" << k;
  }
  // ';' separators keep the echo CSV-safe
  os << "(alpha=" << q.alpha << ";beta=" << q.beta << ";x=" << q.x << ")";
  return os.str();
}

}  // namespace

std::vector<LawValue> evaluate_law(const LawQuery& q, const LevyModel& m) {
  std::vector<LawValue> out;
  if (!q.grid || q.grid->empty()) {
    out.push_back({q.alpha, q.beta, q.x, evaluate_one(q, m), meta_string(q)});
    return out;
  }
  for (double p : *q.grid) {
    LawQuery one = q;
    one.grid.reset();
    switch (law_sweep_variable(q.law)) {
      case SweepVar::Alpha: one.alpha = p; break;
      case SweepVar::Beta: one.beta = p; break;
      case SweepVar::X: one.x = p; break;
    }
    try {
      out.push_back({one.alpha, one.beta, one.x, evaluate_one(one, m), meta_string(one)});
    } catch (const std::exception& e) {
      // name the offending row so grid failures are actionable
      throw std::runtime_error(std::string(e.what()) + " [at " + meta_string(one) + "]");
    }
  }
  return out;
}

}  // namespace fluidq
