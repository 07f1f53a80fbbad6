#pragma once

#include <vector>

#include "dpme/metric.hpp"

namespace dpme {

struct TorusChain {
  int n;
  int d;
  MarkovChain chain;
};

/// Nearest-neighbour walk on (Z/NZ)^d with rate N^2 per lattice direction;
/// coinciding neighbours (N = 2) have their rates summed.
TorusChain build_torus(int n, int d);

/// Density 1 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x) on [0, 1).
class CircleDensity {
 public:
  /// Throws NonPositive unless the density is strictly positive.
  CircleDensity(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  static CircleDensity uniform() { return CircleDensity({}, {}); }

  double operator()(double x) const;
  /// Lifted distribution function: cdf(x + 1) = cdf(x) + 1, cdf(0) = 0.
  double cdf(double x) const;
  /// Lifted quantile function, inverse of cdf on the real line.
  double quantile(double u) const;
  double min_value() const noexcept { return min_; }

  const std::vector<double>& cos_coeffs() const noexcept { return a_; }
  const std::vector<double>& sin_coeffs() const noexcept { return b_; }

  /// The density x -> rho(x - t).
  CircleDensity translated(double t) const;

 private:
  std::vector<double> a_, b_;
  double min_ = 1.0;
};

/// Cell averages over [i/N, (i+1)/N), renormalized to unit mass.
Density discretize(const CircleDensity& rho, const TorusChain& torus);

/// W2 on the circle: min over shifts alpha in [-1, 1] of
/// int_0^1 |G0(u) - G1(u + alpha)|^2 du with lifted quantiles G, midpoint
/// rule with `resolution` nodes, 64-point scan then golden section.
double w2_circle(const CircleDensity& rho0, const CircleDensity& rho1, int resolution = 4096);

struct GhRow {
  int n;
  double w_n;
  double w2;
  double gap;
};

struct GhOptions {
  int steps_per_site = 2;  // K = max(min_steps, steps_per_site * N)
  int min_steps = 32;
  int resolution = 4096;
};

std::vector<GhRow> gh_table(double m, const std::vector<int>& sizes, const CircleDensity& rho0,
                            const CircleDensity& rho1, const GhOptions& opts = {});

/// True when every gap is at most 1.1 times its predecessor.
bool gaps_nonincreasing(const std::vector<GhRow>& rows, double slack = 0.1);

struct ThetaGhReport {
  double m;
  double diagonal_error;        // max |theta(t,t) - t|
  double max_hessian_eigenvalue;
  double property3_violation;   // max of lhs - rhs
};

/// Checks theta(t,t) = t, concavity, and
/// 1/theta~ - 1/theta <= (b-a)^2/(ab) / theta~ with theta~ the harmonic mean,
/// on a log-spaced grid in [lo, hi].
ThetaGhReport theta_gh_properties(double m, double lo = 1e-3, double hi = 1e3, int points = 41);

}  // namespace dpme
