#pragma once

#include <cstdint>
#include <vector>

#include "dpme/entropy.hpp"
#include "dpme/metric.hpp"

namespace dpme {

/// B(rho, psi) = 1/2 <Dhat * grad psi, grad psi>_pi - <rho_hat grad psi, grad(phi'(rho) Lap psi)>_pi,
/// Dhat(x,y) = d1 theta(rho(x),rho(y)) Lap phi(rho)(x) + d2 theta(rho(x),rho(y)) Lap phi(rho)(y).
double hessian_form(const MarkovChain& chain, const EntropyPair& pair, const WeightFunction& theta,
                    const Density& rho, const VertexFunction& psi);

/// Same quantity as a literal triple sum over (x, y, z).
double hessian_form_expanded(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const Density& rho,
                             const VertexFunction& psi);

/// Quadratic forms of B(rho, .) and A(rho, .) as matrices, with the smallest
/// generalized eigenvalue of (B, A) on functions orthogonal to constants.
struct HessianReport {
  Eigen::VectorXd rho;
  Eigen::MatrixXd b_matrix;
  Eigen::MatrixXd a_matrix;
  double lambda = 0.0;
  VertexFunction psi;  // minimizing direction, pi-mean zero, A(rho, psi) = 1
};

HessianReport hessian_report(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const Density& rho);

/// d^2/dt^2 F(rho_t) at t = 0 along the geodesic through (rho, psi), by a
/// five-point stencil with spacing h on forward and backward shots;
/// h <= 0 picks 0.02 / (1 + max rate).
double entropy_second_derivative(const MarkovChain& chain, const EntropyPair& pair,
                                 const WeightFunction& theta, const Density& rho,
                                 const VertexFunction& psi, double h = 0.0);

struct KappaOptions {
  int starts = 64;
  std::uint64_t seed = 0;
  bool seeded = false;        // random starts need an explicit seed
  double floor = 1e-8;        // lower bound on rho during the search
  double vertex_eps = 1e-6;   // off-peak value of the vertex-adjacent starts
  int max_evaluations = 4000; // per start
};

struct KappaStart {
  int index;
  double initial_lambda;
  double final_lambda;
  int evaluations;
  bool converged;
};

struct KappaEstimate {
  double upper = 0.0;  // min over searched rho of lambda(rho); >= kappa_Q
  HessianReport best;
  std::vector<KappaStart> starts;
  bool converged = true;
};

/// Upper estimate of kappa_Q by minimizing lambda(rho) over the interior of
/// the simplex: the uniform density, vertex-adjacent densities and seeded
/// random densities, each refined by Nelder-Mead. Two-state chains are
/// searched on a dense grid instead.
KappaEstimate kappa_estimate(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const KappaOptions& opts);

struct TwoPointKappa {
  double value = 0.0;
  double alpha = 0.0;       // minimizer in (-1, 1)
  bool at_boundary = false; // grid minimum sat in an end cell
};

/// kappa_Q = 1/2 inf_alpha { p phi'(r) + q phi'(s) + theta(r,s)(p f''(r) + q f''(s)) },
/// r = (p+q)(1-alpha)/(2q), s = (p+q)(1+alpha)/(2p); 1e5-point grid plus
/// golden-section refinement.
TwoPointKappa two_point_kappa(double p, double q, const EntropyPair& pair,
                              const WeightFunction& theta);
TwoPointKappa two_point_kappa(double p, double q, const EntropyPair& pair);

struct CounterexampleRow {
  int n;
  double q;
  double eps;
  double a;
  double b;
  double ratio;
};

/// A and B for m = 2 on the N-cycle at psi = (0,1,2,...,2,0),
/// rho = (eps, N - (N-1) eps, eps, ..., eps).
CounterexampleRow circle_counterexample(int n, double q, double eps);

/// N-cycle with rate q between neighbours.
MarkovChain cycle_chain(int n, double q);

/// Two-state chain Q = [[-p, p], [q, -q]].
MarkovChain two_point_chain(double p, double q);

struct FwiResidual {
  double residual;
  double distance;
  double entropy_gap;
  double dissipation;
};

/// F(rho) - F(1) - W(rho,1) sqrt(I(rho)) + kappa/2 W(rho,1)^2.
FwiResidual check_fwi(const MarkovChain& chain, const EntropyPair& pair, const WeightFunction& theta,
                      const Density& rho, double kappa, const DistanceOptions& opts = {});

/// F(rho) - F(1) - I(rho)/(2 lambda).
double check_edi(const MarkovChain& chain, const EntropyPair& pair, const Density& rho,
                 double lambda);

struct ContractionRow {
  double t;
  double distance;
  double bound;
  double residual;
};

/// W(rho_t, sigma_t) - exp(-kappa t) W(rho_0, sigma_0) on t_grid.
std::vector<ContractionRow> contraction_check(const MarkovChain& chain, const EntropyPair& pair,
                                              const WeightFunction& theta, const Density& rho0,
                                              const Density& sigma0, double kappa,
                                              const std::vector<double>& t_grid,
                                              const DistanceOptions& opts = {});

}  // namespace dpme
