#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fluidq/levy_model.hpp"
#include "fluidq/special_fns.hpp"

namespace fluidq {

// q-scale function W^{(q)} of the model: W^{(q)}(x) = 0 for x < 0, and on
// [0, inf) the increasing function with Laplace transform
//   int_0^inf e^{-theta x} W^{(q)}(x) dx = 1/(psi(theta) - q),  theta > Phi(q).
// W^{(q)}(0) = 1/drift for every q.

enum class ScaleEngine { ClosedFormBrownian, MittagLefflerTS, NumericInversion };

/// Brownian-kind alpha-scale function, closed form.  Valid for c >= 0,
/// alpha >= 0; the degenerate-root pair (c = 1, alpha = 0) dispatches to the
/// limit formula w_brownian_c1.
double w_brownian(double x, double alpha, double c);

/// The c -> 1 limit of the Brownian 0-scale function:
/// (1+x) Erfc(-sqrt(x/2)) + sqrt(2x/pi) e^{-x/2}.
double w_brownian_c1(double x);

/// Tempered-stable 0-scale function via the Mittag-Leffler representation
///   W(x) = e^{phi x} (1 + gamma^nu int_0^x e^{-(gamma+phi) y} y^{nu-1}
///                                  E_{nu,nu}(gamma^nu y^nu) dy).
double w_tempered_stable(double x, const TemperedStableParams& p);

/// W^{(q)}(x) by numerical Laplace inversion of the exponentially tilted
/// transform 1/(psi(theta + Phi(q)) - q) (bounded target), then untilting.
double w_generic(double x, const LevyModel& m, double q, const InversionSpec& spec = {});

/// Tilted scale function W^{(q)}_beta(x) = e^{-beta x} W^{(alpha)}(x), where
/// q = alpha - psi(beta).
double w_tilted(double x, double alpha, double beta, const LevyModel& m);

/// Z^{(q)}_beta(x) = 1 + q int_0^x W^{(q)}_beta(t) dt.
double z_tilted(double x, double q, double beta, const LevyModel& m);

/// d W^{(alpha)}(x) / d alpha at alpha = 0, equal to the self-convolution
/// int_0^x W(y) W(x-y) dy.
double w_alpha_derivative_at_zero(double x, const LevyModel& m);

/// Point evaluator for W^{(q)} with a fixed engine.  Immutable after
/// construction and safe for concurrent use; the numeric-inversion engine
/// memoizes computed points in an internally synchronized insert-only map
/// (duplicate concurrent computation is idempotent).
class ScaleFunction {
 public:
  ScaleFunction(LevyModel model, double q, ScaleEngine engine, InversionSpec spec = {});

  /// Natural engine for the model: closed form for Brownian, Mittag-Leffler
  /// for tempered-stable at q = 0, numeric inversion otherwise.
  static ScaleFunction make(const LevyModel& model, double q);

  double operator()(double x) const;

  /// e^{-Phi(q) x} W^{(q)}(x): bounded, increasing to 1/psi'(Phi(q)); the form
  /// used wherever e^{Phi(q) x} would overflow.
  double tilted_value(double x) const;

  /// int_0^x W^{(q)}(y) dy.
  double integral(double x) const;

  /// int_0^x e^{-beta y} W^{(q)}(y) dy.
  double exp_weighted_integral(double beta, double x) const;

  const LevyModel& model() const { return model_; }
  double q() const { return q_; }
  ScaleEngine engine() const { return engine_; }
  double phi_q() const { return phi_q_; }

  /// Largest relative monotonicity correction applied by the
  /// numeric-inversion engine so far (0 for closed forms).
  double clamp_magnitude() const;

 private:
  double inversion_tilted(double x) const;

  LevyModel model_;
  double q_ = 0.0;
  ScaleEngine engine_;
  InversionSpec ispec_;
  double phi_q_ = 0.0;

  struct Memo {
    std::map<double, double> values;  // x -> tilted value
    std::mutex mx;
    double max_clamp = 0.0;
  };
  std::shared_ptr<Memo> memo_;
};

/// Monotone cubic (Fritsch-Carlson) interpolant of W^{(q)} over a user grid;
/// exact at the nodes.  Grid values are checked nondecreasing on construction.
class GriddedScaleFunction {
 public:
  GriddedScaleFunction(const ScaleFunction& w, std::vector<double> grid);
  double operator()(double x) const;
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, d_;  // nodes, values, node slopes
};

}  // namespace fluidq
