#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dpme {

using ScalarFn = std::function<double(double)>;

/// Nonlinearity phi and entropy integrand f with the derivatives the rest of
/// the library needs. phi must be strictly increasing and continuous at 0,
/// f strictly convex and continuous at 0.
class EntropyPair {
 public:
  enum class Kind { Heat, Renyi, Hilbertian, Custom };

  struct Functions {
    ScalarFn phi, dphi, d2phi;  // d2phi optional
    ScalarFn f, df, d2f, d3f;   // d3f optional
  };

  /// phi(r) = r, f(r) = r log r.
  static EntropyPair heat();
  /// phi(r) = r^m, f(r) = r^m / (m - 1); 0 < m <= 2, m != 1.
  static EntropyPair renyi(double m);
  /// f = antiderivative of phi with phi(r) = r.
  static EntropyPair hilbertian_identity();
  /// f = antiderivative of phi with phi(r) = r^m, m > 0.
  static EntropyPair hilbertian_power(double m);
  /// Validates monotonicity of phi and convexity of f on the probe grid.
  static EntropyPair custom(std::string name, Functions fns);

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  const std::string& name() const noexcept { return name_; }

  double phi(double r) const { return fns_.phi(r); }
  double dphi(double r) const { return fns_.dphi(r); }
  double f(double r) const { return fns_.f(r); }
  double df(double r) const { return fns_.df(r); }
  double d2f(double r) const { return fns_.d2f(r); }
  bool has_d2phi() const { return static_cast<bool>(fns_.d2phi); }
  bool has_d3f() const { return static_cast<bool>(fns_.d3f); }
  double d2phi(double r) const { return fns_.d2phi(r); }
  double d3f(double r) const { return fns_.d3f(r); }

  /// False when f'(r) -> -infinity as r -> 0 (heat, Renyi with m < 1).
  bool df_finite_at_zero() const noexcept { return df_finite_at_zero_; }

 private:
  EntropyPair(Kind kind, double exponent, std::string name, Functions fns, bool df_finite_at_zero);

  Kind kind_;
  double exponent_;
  std::string name_;
  Functions fns_;
  bool df_finite_at_zero_;
};

/// 256 log-spaced points in [1e-6, 1e6].
const std::vector<double>& probe_grid();

}  // namespace dpme
