#pragma once

#include <vector>

#include "dpme/markov_chain.hpp"
#include "dpme/weights.hpp"

namespace dpme {

/// A(rho, psi) = ||grad psi||_rho^2.
double action(const MarkovChain& chain, const WeightFunction& theta, const Density& rho,
              const VertexFunction& psi);

struct DistanceOptions {
  int steps = 32;             // time intervals K
  double feas_tol = 1e-8;     // continuity-equation residual
  double opt_tol = 1e-6;      // target accuracy of the returned value
  int max_iterations = 2000;  // Newton iterations over all barrier stages
  double barrier_start = 1e-4;
  double barrier_end = 1e-13;
};

/// Time-discretized curve (rho_k, V_k) solving the discrete continuity
/// equation pi (rho_{k+1} - rho_k)/dt + pi div(V_k) = 0 with antisymmetric
/// momenta V_k; interval k uses the midpoint density (rho_k + rho_{k+1})/2.
struct TransportPath {
  int steps = 0;
  std::vector<Eigen::VectorXd> densities;   // K + 1 nodes
  std::vector<EdgeFunction> momenta;        // K intervals
  std::vector<VertexFunction> potentials;   // K intervals, pi-mean zero
  double action = 0.0;                      // sum_k dt * A_k
};

struct DistanceResult {
  double value = 0.0;
  TransportPath path;
  int iterations = 0;
  double feasibility_residual = 0.0;
  /// Smallest d^T H d / |d|^2 of the (barrier-free) objective Hessian over
  /// the Newton directions d taken; >= -1e-8 certifies convexity numerically.
  double min_curvature = 0.0;
};

/// Transport distance W via the Benamou-Brenier-type problem
///   min sum_k dt sum_edges F^2 / (w theta(rho_bar))
/// over densities and edge fluxes F = w V, solved by a primal log-barrier
/// Newton method with equality constraints (KKT systems factorized with
/// sparse LU), started from the theta = 1 linear-interpolation path.
DistanceResult distance(const MarkovChain& chain, const WeightFunction& theta, const Density& rho0,
                        const Density& rho1, const DistanceOptions& opts = {});

struct GeodesicOptions {
  int n_out = 101;
  double rtol = 1e-10;
  double atol = 1e-12;
  double interior_floor = 1e-9;
};

struct GeodesicSample {
  double t;
  Eigen::VectorXd rho;
  VertexFunction psi;
  double action;
};

/// Integrates the geodesic equations
///   d/dt rho(x) + sum_y (psi(y) - psi(x)) theta(rho(x), rho(y)) Q(x,y) = 0
///   d/dt psi(x) + 1/2 sum_y (psi(x) - psi(y))^2 d1 theta(rho(x), rho(y)) Q(x,y) = 0
/// on [0, t_end]; throws LeftInterior if some rho(x) drops below the floor.
std::vector<GeodesicSample> geodesic_shoot(const MarkovChain& chain, const WeightFunction& theta,
                                           const Density& rho0, const VertexFunction& psi0,
                                           double t_end, const GeodesicOptions& opts = {});

/// sqrt(c^2 + ||grad Delta^{-1}(psi - c)||_pi^2) with c = sum psi pi.
double hminus1_norm(const MarkovChain& chain, const VertexFunction& psi);

/// Solves Delta u = psi for pi-mean-zero psi, returning the pi-mean-zero u.
VertexFunction solve_poisson(const MarkovChain& chain, const VertexFunction& psi);

/// Distance selector for routines that work with either the H^-1 norm or a
/// transport metric.
class MetricHandle {
 public:
  static MetricHandle hminus1() { return MetricHandle(true, WeightFunction::constant(), {}); }
  static MetricHandle transport(WeightFunction theta, DistanceOptions opts = {}) {
    return MetricHandle(false, std::move(theta), opts);
  }

  bool is_hminus1() const noexcept { return hminus1_; }
  const WeightFunction& weight() const noexcept { return theta_; }
  const DistanceOptions& options() const noexcept { return opts_; }

  double operator()(const MarkovChain& chain, const Density& a, const Density& b) const;

 private:
  MetricHandle(bool hminus1, WeightFunction theta, DistanceOptions opts)
      : hminus1_(hminus1), theta_(std::move(theta)), opts_(opts) {}

  bool hminus1_;
  WeightFunction theta_;
  DistanceOptions opts_;
};

}  // namespace dpme
