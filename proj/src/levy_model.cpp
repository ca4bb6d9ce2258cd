#include "fluidq/levy_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fluidq {

LevyModel LevyModel::brownian(double c) {
  if (c < 0.0 || !std::isfinite(c))
    throw std::invalid_argument("LevyModel::brownian: need c >= 0");
  LevyModel m;
  m.kind_ = ModelKind::BrownianLocalTime;
  m.drift_ = 1.0;
  m.bp_.c = c;
  return m;
}

LevyModel LevyModel::tempered_stable(double phi, double gamma, double nu) {
  LevyModel m;
  m.kind_ = ModelKind::TemperedStableLocalTime;
  m.drift_ = 1.0;
  m.tp_ = {phi, gamma, nu};
  return m;
}

LevyModel LevyModel::custom(std::function<double(double)> psi_fn, double drift,
                            std::function<std::complex<double>(std::complex<double>)>
                                psi_complex_fn) {
  if (!psi_fn) throw std::invalid_argument("LevyModel::custom: psi callable required");
  LevyModel m;
  m.kind_ = ModelKind::Custom;
  m.drift_ = drift;
  m.cp_.psi = std::move(psi_fn);
  m.cp_.drift = drift;
  m.cp_.psi_complex = std::move(psi_complex_fn);
  return m;
}

bool LevyModel::has_complex_psi() const {
  return kind_ != ModelKind::Custom || static_cast<bool>(cp_.psi_complex);
}

const BrownianParams& LevyModel::brownian_params() const {
  if (kind_ != ModelKind::BrownianLocalTime)
    throw std::logic_error("LevyModel: not a Brownian local-time model");
  return bp_;
}

const TemperedStableParams& LevyModel::tempered_stable_params() const {
  if (kind_ != ModelKind::TemperedStableLocalTime)
    throw std::logic_error("LevyModel: not a tempered-stable model");
  return tp_;
}

const CustomParams& LevyModel::custom_params() const {
  if (kind_ != ModelKind::Custom) throw std::logic_error("LevyModel: not a custom model");
  return cp_;
}

std::string LevyModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::BrownianLocalTime:
      os << "brownian(c=" << bp_.c << ")";
      break;
    case ModelKind::TemperedStableLocalTime:
      os << "tempered_stable(phi=" << tp_.phi << ",gamma=" << tp_.gamma
         << ",nu=" << tp_.nu << ")";
      break;
    case ModelKind::Custom:
      os << "custom(drift=" << drift_ << ")";
      break;
  }
  return os.str();
}

double psi(const LevyModel& m, double theta) {
  if (theta < 0.0) throw std::domain_error("psi: need theta >= 0");
  if (theta == 0.0) return 0.0;  // psi(0) = 0 by definition; avoids cancellation
  switch (m.kind()) {
    case ModelKind::BrownianLocalTime: {
      const double c = m.brownian_params().c;
      return theta - std::sqrt(2.0 * theta + c * c) + c;
    }
    case ModelKind::TemperedStableLocalTime: {
      const auto& p = m.tempered_stable_params();
      return (theta - p.phi) * (1.0 - std::pow(p.gamma / (p.gamma + theta), p.nu));
    }
    case ModelKind::Custom:
      return m.custom_params().psi(theta);
  }
  return 0.0;  // unreachable
}

std::complex<double> psi_complex(const LevyModel& m, std::complex<double> theta) {
  switch (m.kind()) {
    case ModelKind::BrownianLocalTime: {
      const double c = m.brownian_params().c;
      return theta - std::sqrt(2.0 * theta + c * c) + c;
    }
    case ModelKind::TemperedStableLocalTime: {
      const auto& p = m.tempered_stable_params();
      return (theta - p.phi) *
             (1.0 - std::pow(p.gamma / (p.gamma + theta), std::complex<double>(p.nu)));
    }
    case ModelKind::Custom:
      if (!m.custom_params().psi_complex)
        throw std::runtime_error("psi_complex: custom model lacks a complex psi");
      return m.custom_params().psi_complex(theta);
  }
  return {};  // unreachable
}

double psi_prime(const LevyModel& m, double theta) {
  if (theta < 0.0) throw std::domain_error("psi_prime: need theta >= 0");
  switch (m.kind()) {
    case ModelKind::BrownianLocalTime: {
      const double c = m.brownian_params().c;
      return 1.0 - 1.0 / std::sqrt(2.0 * theta + c * c);
    }
    case ModelKind::TemperedStableLocalTime: {
      const auto& p = m.tempered_stable_params();
      const double ratio = std::pow(p.gamma / (p.gamma + theta), p.nu);
      return (1.0 - ratio) + (theta - p.phi) * p.nu * ratio / (p.gamma + theta);
    }
    case ModelKind::Custom: {
      const auto& f = m.custom_params().psi;
      const double h = std::max(1e-6, 1e-6 * theta);
      if (theta >= 2.0 * h) {
        // fourth-order central difference
        return (-f(theta + 2 * h) + 8 * f(theta + h) - 8 * f(theta - h) +
                f(theta - 2 * h)) /
               (12.0 * h);
      }
      // fourth-order one-sided stencil; psi may be undefined left of 0
      return (-25 * f(theta) + 48 * f(theta + h) - 36 * f(theta + 2 * h) +
              16 * f(theta + 3 * h) - 3 * f(theta + 4 * h)) /
             (12.0 * h);
    }
  }
  return 0.0;  // unreachable
}

double phi_inverse_root(const LevyModel& m, double q) {
  if (q < 0.0 && q > -1e-12) q = 0.0;  // tolerate downstream rounding noise
  if (q < 0.0) throw std::domain_error("phi_inverse: need q >= 0");

  // Locate the region where psi increases: double until psi'(t) > 0.
  double t = 1.0;
  int guard = 0;
  while (psi_prime(m, t) <= 0.0) {
    t *= 2.0;
    if (++guard > 200) throw std::runtime_error("phi_inverse: psi' never turns positive");
  }
  // Walk the lower bracket end left while psi is still above q there, keeping
  // psi' >= 0 so only the right root is bracketed.
  double lo = t;
  guard = 0;
  while (lo > 1e-300 && psi(m, lo) > q && psi_prime(m, lo * 0.5) > 0.0) {
    lo *= 0.5;
    if (++guard > 2000) break;
  }
  double hi = std::max(2.0 * lo, 1.0);
  guard = 0;
  while (psi(m, hi) <= q) {
    hi *= 2.0;
    if (++guard > 200)
      throw std::runtime_error("phi_inverse: no upper bracket found (psi(" +
                               std::to_string(hi) + ") <= q)");
  }
  if (psi(m, lo) > q) lo = 0.0;  // q below psi on the whole walked range

  // Safeguarded Newton with bisection fallback.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = psi(m, x) - q;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    const double dfx = psi_prime(m, x);
    double xn = (dfx > 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 1e-12 * std::max(1.0, std::abs(xn))) return xn;
    x = xn;
  }
  std::ostringstream os;
  os << "phi_inverse: no convergence for q=" << q << " (bracket [" << lo << ", " << hi
     << "], psi(lo)=" << psi(m, lo) << ", psi(hi)=" << psi(m, hi) << ")";
  throw std::runtime_error(os.str());
}

double phi_inverse(const LevyModel& m, double q) {
  if (q < 0.0 && q > -1e-12) q = 0.0;  // tolerate downstream rounding noise
  if (q < 0.0) throw std::domain_error("phi_inverse: need q >= 0");
  switch (m.kind()) {
    case ModelKind::BrownianLocalTime: {
      // psi(theta) = q is quadratic in s = sqrt(2 theta + c^2); the right
      // root has s = 1 + sqrt((1-c)^2 + 2q).
      const double c = m.brownian_params().c;
      const double s = 1.0 + std::sqrt((1.0 - c) * (1.0 - c) + 2.0 * q);
      return 0.5 * (s * s - c * c);
    }
    case ModelKind::TemperedStableLocalTime:
      if (q == 0.0) return m.tempered_stable_params().phi;
      return phi_inverse_root(m, q);
    case ModelKind::Custom:
      return phi_inverse_root(m, q);
  }
  return 0.0;  // unreachable
}

std::vector<std::string> validate(const LevyModel& m) {
  std::vector<std::string> violations;
  if (!(m.drift() > 0.0)) violations.push_back("drift must be > 0");

  switch (m.kind()) {
    case ModelKind::BrownianLocalTime: {
      const double c = m.brownian_params().c;
      if (!(c > 0.0 && c < 1.0))
        violations.push_back("c must lie in (0,1) for queue laws");
      break;
    }
    case ModelKind::TemperedStableLocalTime: {
      const auto& p = m.tempered_stable_params();
      if (!(p.phi > 0.0)) violations.push_back("phi must be > 0");
      if (!(p.gamma > 0.0)) violations.push_back("gamma must be > 0");
      if (!(p.nu > 0.0 && p.nu < 1.0)) violations.push_back("nu must lie in (0,1)");
      break;
    }
    case ModelKind::Custom: {
      const double p0 = std::abs(m.custom_params().psi(0.0));
      if (p0 > 1e-12) violations.push_back("psi(0) must be 0");
      // drift consistency: psi(theta)/theta -> drift as theta -> inf
      const double th = 1e10;
      const double slope = m.custom_params().psi(th) / th;
      if (std::abs(slope - m.drift()) > 1e-2 * std::max(1.0, std::abs(m.drift())))
        violations.push_back("declared drift inconsistent with psi at large theta");
      break;
    }
  }

  bool params_ok = violations.empty();
  if (params_ok || m.kind() == ModelKind::Custom) {
    try {
      if (!(psi_prime(m, 0.0) < 0.0))
        violations.push_back("psi'(0+) must be < 0 (input rate mu must be < 1)");
    } catch (const std::exception&) {
      violations.push_back("psi'(0+) not evaluable");
    }
  }
  return violations;
}

void require_valid_for_queue_laws(const LevyModel& m) {
  auto v = validate(m);
  if (v.empty()) return;
  std::string msg = "invalid model for queue laws:";
  for (const auto& s : v) msg += " [" + s + "]";
  throw std::domain_error(msg);
}

}  // namespace fluidq
