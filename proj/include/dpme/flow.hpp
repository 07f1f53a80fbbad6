#pragma once

#include <vector>

#include "dpme/entropy.hpp"
#include "dpme/markov_chain.hpp"
#include "dpme/metric.hpp"

namespace dpme {

struct PmeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Uniform output grid of n_out points on [0, t_end] unless output_times
  /// is given (ascending, within [0, t_end]).
  int n_out = 101;
  std::vector<double> output_times;
  double initial_step = 1e-4;
};

/// Solution of d/dt rho = Delta phi(rho) sampled at output times, with
/// per-sample diagnostics.
struct Trajectory {
  std::vector<double> times;
  std::vector<Density> states;
  std::vector<double> mass_defect;
  std::vector<double> min_density;
  std::vector<double> entropy;
  std::vector<double> dissipation;

  std::size_t size() const noexcept { return times.size(); }
};

/// Integrates the discrete porous medium equation with an adaptive
/// Dormand-Prince pair. Steps producing an entry below -1e-12 are retried at
/// half the step; entries in [-1e-12, 0) are clamped to 0.
Trajectory solve_pme(const MarkovChain& chain, const EntropyPair& pair, const Density& rho0,
                     double t_end, const PmeOptions& opts = {});

/// Right-hand side Delta phi(rho).
VertexFunction pme_rhs(const MarkovChain& chain, const EntropyPair& pair, const VertexFunction& rho);

struct EviSample {
  double t;
  double distance;
  double residual;
};

/// r(t) = 1/2 d/dt d(rho_t, sigma)^2 + kappa/2 d(rho_t, sigma)^2 - F(sigma) + F(rho_t)
/// at every interior sample of the trajectory; the derivative is the
/// second-order three-point difference over neighbouring samples.
std::vector<EviSample> evi_residual(const MarkovChain& chain, const EntropyPair& pair,
                                    const MetricHandle& metric, const Trajectory& traj,
                                    const Density& sigma, double kappa);

}  // namespace dpme
