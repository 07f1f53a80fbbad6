#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpme/entropy_pair.hpp"

namespace dpme {

/// Value and derivatives of a weight function at one point.
struct WeightJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d11 = 0.0;
  double d12 = 0.0;
  double d22 = 0.0;
};

/// A mean theta(r, s) on [0, inf)^2: symmetric, positive in the interior,
/// monotone and concave.
///
/// The power family (which contains the logarithmic and harmonic means) is
/// evaluated as theta(r,s) = sqrt(rs) k(log(r/s)), with
///   k(u) = sinhc(m u / 2) / sinhc((m - 1) u / 2),   sinhc(z) = sinh(z) / z,
/// which has no cancellation at r = s and gives closed-form derivatives of
/// every order. Quotient weights theta_{phi,f} use the mean-value form
/// int phi' / int f'' over the segment [s, r] when |r - s| <= max(r, s) / 4.
class WeightFunction {
 public:
  enum class Kind { Logarithmic, Power, Harmonic, Constant, PairQuotient };

  static WeightFunction logarithmic();
  /// 0 < m <= 2; m = 1 gives the logarithmic mean.
  static WeightFunction power(double m);
  /// 2rs / (r + s). Used as a comparison device only.
  static WeightFunction harmonic();
  /// theta = 1.
  static WeightFunction constant();
  /// (phi(r) - phi(s)) / (f'(r) - f'(s)).
  static WeightFunction from_pair(const EntropyPair& pair);

  Kind kind() const noexcept { return kind_; }
  /// Power exponent m (1 for logarithmic, -1 for harmonic, 0 otherwise).
  double exponent() const noexcept { return m_; }
  std::string name() const;

  double operator()(double r, double s) const { return value(r, s); }
  double value(double r, double s) const;
  double d1(double r, double s) const;
  double d2(double r, double s) const;
  /// All derivatives up to second order; requires r, s > 0 except where the
  /// kind has finite boundary derivatives (constant, arithmetic).
  WeightJet jet(double r, double s) const;

 private:
  WeightFunction(Kind kind, double m) : kind_(kind), m_(m) {}

  WeightJet homogeneous_jet(double r, double s) const;
  double homogeneous_value(double r, double s) const;
  double pair_value(double r, double s) const;
  WeightJet pair_jet(double r, double s) const;

  Kind kind_;
  double m_;
  std::shared_ptr<const EntropyPair> pair_;
};

/// theta_m via Gauss-Legendre quadrature of
/// int_0^1 ((1 - a) r^{m-1} + a s^{m-1})^{1/(m-1)} da; at m = 1 the
/// integrand is r^{1-a} s^a.
double theta_power_integral(double m, double r, double s, int quad_points);

/// Gauss-Legendre nodes and weights on [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(int points);

/// Worst-case violations of the weight-function axioms on a log-spaced grid
/// of (r, s) in [lo, hi]^2. All "violation" fields are >= 0 when the property
/// holds exactly; they are reported signed so callers can apply tolerances.
struct WeightPropertyReport {
  double symmetry_gap = 0.0;            // max |theta(r,s) - theta(s,r)|
  double min_interior_value = 0.0;      // min theta(r,s), r,s > 0
  double monotonicity_violation = 0.0;  // max theta(r,s) - theta(r,t), s <= t
  double max_hessian_eigenvalue = 0.0;  // max eigenvalue of the 2x2 Hessian
  double doubling_violation = 0.0;      // max theta(2s,2t) - 2 theta(s,t)
  double derivative_mismatch = 0.0;     // max relative gap d1/d2 vs central FD
  double c_theta = 0.0;                 // int_0^1 theta(1-r,1+r)^{-1/2} dr
};

WeightPropertyReport check_weight_properties(const WeightFunction& theta, double lo = 1e-3,
                                             double hi = 1e3, int points = 41);

}  // namespace dpme
