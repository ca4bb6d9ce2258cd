#include "fluidq/scale_fn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fluidq {

namespace {

// Inversion noise above this violates the defining monotonicity and fails the
// evaluation.  The Talbot engine sits at ~1e-11 so 1e-6 is generous; the
// real-axis Gaver-Stehfest fallback is intrinsically ~1e-6..1e-5 and gets a
// wider budget.
constexpr double kClampFailThreshold = 1e-6;
constexpr double kClampFailThresholdGS = 1e-3;

struct BrownianRoots {
  double l1, l2;  // lambda_{1,2} = 1 +/- sqrt((1-c)^2 + 2 alpha)
};

BrownianRoots brownian_roots(double alpha, double c) {
  const double disc = (1.0 - c) * (1.0 - c) + 2.0 * alpha;
  const double d = std::sqrt(disc);
  return {1.0 + d, 1.0 - d};
}

bool degenerate_roots(double alpha, double c) {
  return (1.0 - c) * (1.0 - c) + 2.0 * alpha == 0.0;
}

// e^{-Phi(alpha) x} W^{(alpha)}(x) for the Brownian kind, written so that every
// exponent is nonpositive (Phi(alpha) = (l1^2 - c^2)/2).
double brownian_tilted(double x, double alpha, double c) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0;
  if (degenerate_roots(alpha, c)) return w_brownian_c1(x);  // Phi(0) = 0 at c = 1
  const auto [l1, l2] = brownian_roots(alpha, c);
  const double s = std::sqrt(0.5 * x);
  const double e1 = std::exp(-0.5 * l1 * l1 * x);
  const double term1 = l1 * (2.0 - e1 * erfcx(l1 * s));
  double term2;
  if (l2 > 0.0)
    term2 = l2 * (2.0 * std::exp(-0.5 * (l1 * l1 - l2 * l2) * x) - e1 * erfcx(l2 * s));
  else
    term2 = l2 * e1 * erfcx(-l2 * s);
  return (term1 - term2) / (l1 - l2);
}

double tempered_stable_tilted_factor(double x, const TemperedStableParams& p) {
  // e^{-phi x} W(x) = 1 + gamma^nu int_0^x e^{-(gamma+phi) y} y^{nu-1}
  //                                E_{nu,nu}(gamma^nu y^nu) dy
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0;
  const double gnu = std::pow(p.gamma, p.nu);
  auto f = [&](double y) {
    return std::exp(-(p.gamma + p.phi) * y) * std::pow(y, p.nu - 1.0) *
           mittag_leffler(p.nu, p.nu, gnu * std::pow(y, p.nu));
  };
  return 1.0 + gnu * integrate_singular_origin(f, x, p.nu);
}

}  // namespace

double w_brownian_c1(double x) {
  if (x < 0.0) return 0.0;
  const double s = std::sqrt(0.5 * x);
  return (1.0 + x) * erfc(-s) + std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 * x);
}

double w_brownian(double x, double alpha, double c) {
  if (x < 0.0) return 0.0;
  if (alpha < 0.0 || c < 0.0) throw std::domain_error("w_brownian: need alpha >= 0, c >= 0");
  if (x == 0.0) return 1.0;
  if (degenerate_roots(alpha, c)) return w_brownian_c1(x);
  const auto [l1, l2] = brownian_roots(alpha, c);
  const double s = std::sqrt(0.5 * x);
  // e^{l^2 x/2} Erfc(-l sqrt(x/2)) = erfcx(-l sqrt(x/2))
  const double t1 = l1 * erfcx(-l1 * s);
  const double t2 = l2 * erfcx(-l2 * s);
  return std::exp(-0.5 * c * c * x) * (t1 - t2) / (l1 - l2);
}

double w_tempered_stable(double x, const TemperedStableParams& p) {
  if (!(p.phi > 0.0) || !(p.gamma > 0.0) || !(p.nu > 0.0 && p.nu < 1.0))
    throw std::domain_error("w_tempered_stable: invalid parameters");
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0;
  return std::exp(p.phi * x) * tempered_stable_tilted_factor(x, p);
}

double w_generic(double x, const LevyModel& m, double q, const InversionSpec& spec) {
  return ScaleFunction(m, q, ScaleEngine::NumericInversion, spec)(x);
}

double w_tilted(double x, double alpha, double beta, const LevyModel& m) {
  if (beta < 0.0) throw std::domain_error("w_tilted: need beta >= 0");
  return std::exp(-beta * x) * ScaleFunction::make(m, alpha)(x);
}

double z_tilted(double x, double q, double beta, const LevyModel& m) {
  if (x < 0.0) throw std::domain_error("z_tilted: need x >= 0");
  if (beta < 0.0) throw std::domain_error("z_tilted: need beta >= 0");
  if (x == 0.0 || q == 0.0) return 1.0;
  const double alpha = q + psi(m, beta);
  if (alpha < 0.0)
    throw std::domain_error("z_tilted: q + psi(beta) < 0 is outside the supported range");
  ScaleFunction w = ScaleFunction::make(m, alpha);
  return 1.0 + q * w.exp_weighted_integral(beta, x);
}

double w_alpha_derivative_at_zero(double x, const LevyModel& m) {
  if (x < 0.0) throw std::domain_error("w_alpha_derivative_at_zero: need x >= 0");
  if (x == 0.0) return 0.0;
  ScaleFunction w = ScaleFunction::make(m, 0.0);
  return integrate([&](double y) { return w(y) * w(x - y); }, 0.0, x);
}

// ---------------------------------------------------------------------------
// ScaleFunction
// ---------------------------------------------------------------------------

ScaleFunction::ScaleFunction(LevyModel model, double q, ScaleEngine engine, InversionSpec spec)
    : model_(std::move(model)), q_(q), engine_(engine), ispec_(spec),
      memo_(std::make_shared<Memo>()) {
  if (q_ < 0.0) throw std::domain_error("ScaleFunction: need q >= 0");
  if (engine_ == ScaleEngine::ClosedFormBrownian &&
      model_.kind() != ModelKind::BrownianLocalTime)
    throw std::invalid_argument("ScaleFunction: closed-form engine needs a Brownian model");
  if (engine_ == ScaleEngine::MittagLefflerTS) {
    if (model_.kind() != ModelKind::TemperedStableLocalTime)
      throw std::invalid_argument("ScaleFunction: Mittag-Leffler engine needs a tempered-stable model");
    if (q_ != 0.0)
      throw std::invalid_argument("ScaleFunction: Mittag-Leffler engine covers q = 0 only");
  }
  if (engine_ == ScaleEngine::NumericInversion && !model_.has_complex_psi() &&
      ispec_.method == InversionMethod::FixedTalbot) {
    // Talbot needs psi on a complex contour; fall back to real-axis Gaver-Stehfest.
    ispec_ = {InversionMethod::GaverStehfest, 14};
  }
  phi_q_ = phi_inverse(model_, q_);
}

ScaleFunction ScaleFunction::make(const LevyModel& m, double q) {
  switch (m.kind()) {
    case ModelKind::BrownianLocalTime:
      return ScaleFunction(m, q, ScaleEngine::ClosedFormBrownian);
    case ModelKind::TemperedStableLocalTime:
      if (q == 0.0) return ScaleFunction(m, q, ScaleEngine::MittagLefflerTS);
      return ScaleFunction(m, q, ScaleEngine::NumericInversion);
    case ModelKind::Custom:
      return ScaleFunction(m, q, ScaleEngine::NumericInversion);
  }
  throw std::logic_error("ScaleFunction::make: unknown model kind");
}

double ScaleFunction::operator()(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0 / model_.drift();
  switch (engine_) {
    case ScaleEngine::ClosedFormBrownian:
      return w_brownian(x, q_, model_.brownian_params().c);
    case ScaleEngine::MittagLefflerTS:
      return w_tempered_stable(x, model_.tempered_stable_params());
    case ScaleEngine::NumericInversion:
      return inversion_tilted(x) * std::exp(phi_q_ * x);
  }
  return 0.0;  // unreachable
}

double ScaleFunction::tilted_value(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0 / model_.drift();
  switch (engine_) {
    case ScaleEngine::ClosedFormBrownian:
      return brownian_tilted(x, q_, model_.brownian_params().c);
    case ScaleEngine::MittagLefflerTS:
      return tempered_stable_tilted_factor(x, model_.tempered_stable_params());
    case ScaleEngine::NumericInversion:
      return inversion_tilted(x);
  }
  return 0.0;  // unreachable
}

double ScaleFunction::inversion_tilted(double x) const {
  {
    std::lock_guard<std::mutex> lock(memo_->mx);
    auto it = memo_->values.find(x);
    if (it != memo_->values.end()) return it->second;
  }
  const double q = q_, phiq = phi_q_;
  const LevyModel& m = model_;
  LaplaceTransform shifted = [&m, q, phiq](std::complex<double> s) {
    if (s.imag() == 0.0) {
      const double sr = s.real();
      return std::complex<double>(1.0 / (psi(m, sr + phiq) - q), 0.0);
    }
    return 1.0 / (psi_complex(m, s + phiq) - q);
  };
  double v = laplace_invert(shifted, x, ispec_);
  const double clamp_budget = (ispec_.method == InversionMethod::GaverStehfest)
                                  ? kClampFailThresholdGS
                                  : kClampFailThreshold;

  std::lock_guard<std::mutex> lock(memo_->mx);
  auto right = memo_->values.lower_bound(x);
  if (right != memo_->values.end() && right->first == x) return right->second;
  if (right != memo_->values.begin()) {
    auto left = std::prev(right);
    if (v < left->second) {
      const double rel = (left->second - v) / std::max(std::abs(left->second), 1e-300);
      if (rel > clamp_budget)
        throw std::runtime_error(
            "ScaleFunction: inversion noise violates monotonicity by " +
            std::to_string(rel) + " relative at x=" + std::to_string(x));
      memo_->max_clamp = std::max(memo_->max_clamp, rel);
      v = left->second;
    }
  }
  if (right != memo_->values.end() && v > right->second) {
    const double rel = (v - right->second) / std::max(std::abs(right->second), 1e-300);
    if (rel > clamp_budget)
      throw std::runtime_error(
          "ScaleFunction: inversion noise violates monotonicity by " +
          std::to_string(rel) + " relative at x=" + std::to_string(x));
    memo_->max_clamp = std::max(memo_->max_clamp, rel);
    v = right->second;
  }
  memo_->values.emplace(x, v);
  return v;
}

double ScaleFunction::integral(double x) const {
  if (x <= 0.0) return 0.0;
  return integrate([this](double y) { return (*this)(y); }, 0.0, x);
}

double ScaleFunction::exp_weighted_integral(double beta, double x) const {
  if (x <= 0.0) return 0.0;
  return integrate([this, beta](double y) { return std::exp(-beta * y) * (*this)(y); },
                   0.0, x);
}

double ScaleFunction::clamp_magnitude() const {
  std::lock_guard<std::mutex> lock(memo_->mx);
  return memo_->max_clamp;
}

// ---------------------------------------------------------------------------
// GriddedScaleFunction (Fritsch-Carlson monotone cubic)
// ---------------------------------------------------------------------------

GriddedScaleFunction::GriddedScaleFunction(const ScaleFunction& w, std::vector<double> grid)
    : x_(std::move(grid)) {
  if (x_.size() < 2) throw std::invalid_argument("GriddedScaleFunction: need >= 2 nodes");
  if (!std::is_sorted(x_.begin(), x_.end()))
    throw std::invalid_argument("GriddedScaleFunction: grid must be sorted");
  y_.resize(x_.size());
  for (size_t i = 0; i < x_.size(); ++i) y_[i] = w(x_[i]);
  for (size_t i = 0; i + 1 < y_.size(); ++i) {
    if (y_[i + 1] < y_[i]) {
      const double rel = (y_[i] - y_[i + 1]) / std::max(std::abs(y_[i]), 1e-300);
      if (rel > kClampFailThreshold)
        throw std::runtime_error("GriddedScaleFunction: values decrease along the grid");
      y_[i + 1] = y_[i];
    }
  }
  const size_t n = x_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    if (h[i] <= 0.0) throw std::invalid_argument("GriddedScaleFunction: repeated grid nodes");
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  d_[0] = delta[0];
  d_[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
}

double GriddedScaleFunction::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

}  // namespace fluidq
