#pragma once

#include <Eigen/Dense>

#include <random>

#include "dpme/markov_chain.hpp"

namespace dpme::testing {

// Reversible chain from a random stationary law and symmetric conductances
// on a random connected graph (a path plus extra edges).
inline MarkovChain random_chain(std::mt19937_64& rng, int n, double extra_edge_prob = 0.4) {
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::VectorXd pi(n);
  for (int x = 0; x < n; ++x) pi(x) = unit(rng);
  pi /= pi.sum();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x + 1 < n; ++x) w(x, x + 1) = w(x + 1, x) = unit(rng);
  for (int x = 0; x < n; ++x) {
    for (int y = x + 2; y < n; ++y) {
      if (coin(rng) < extra_edge_prob) w(x, y) = w(y, x) = unit(rng);
    }
  }
  Eigen::MatrixXd q(n, n);
  for (int x = 0; x < n; ++x) {
    double row = 0.0;
    for (int y = 0; y < n; ++y) {
      q(x, y) = x == y ? 0.0 : w(x, y) / pi(x);
      row += q(x, y);
    }
    q(x, x) = -row;
  }
  return MarkovChain::build(q);
}

// Interior density with entries spread over roughly [lo, 1] before normalization.
inline Density random_density(std::mt19937_64& rng, const MarkovChain& chain, double lo = 0.1) {
  std::uniform_real_distribution<double> unit(lo, 1.0);
  Eigen::VectorXd v(chain.size());
  for (int x = 0; x < chain.size(); ++x) v(x) = unit(rng);
  return Density::normalized(chain, v);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Exact transport distance on a two-state chain: the geodesic is the segment,
// W = int pi_a / sqrt(w theta(rho_a, rho_b)) |d rho_a| with w = Q(a,b) pi(a).
template <class Theta>
double two_point_distance(const MarkovChain& chain, const Theta& theta, double a0, double a1,
                          int nodes = 200000) {
  const double pa = chain.pi()(0);
  const double pb = chain.pi()(1);
  const double w = chain.rate(0, 1) * pa;
  const double lo = std::min(a0, a1);
  const double hi = std::max(a0, a1);
  const double h = (hi - lo) / nodes;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double ra = lo + (i + 0.5) * h;
    const double rb = (1.0 - pa * ra) / pb;
    acc += pa / std::sqrt(w * theta(ra, rb)) * h;
  }
  return acc;
}

}  // namespace dpme::testing
