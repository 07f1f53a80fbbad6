#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "dpme/error.hpp"

namespace dpme {

using VertexFunction = Eigen::VectorXd;
/// Function on ordered state pairs. Entries on non-edges (Q(x,y) = 0) are
/// never read by the inner products below.
using EdgeFunction = Eigen::MatrixXd;

class WeightFunction;

/// Undirected edge {x, y} with x < y and symmetric conductance
/// w = Q(x,y) pi(x) = Q(y,x) pi(y).
struct Edge {
  int x;
  int y;
  double w;
};

/// Finite irreducible reversible Markov chain (X, Q, pi). Immutable.
class MarkovChain {
 public:
  /// Validates Q and computes pi from the null space of Q^T. A supplied pi is
  /// only cross-checked against the computed one.
  static MarkovChain build(const Eigen::MatrixXd& rates,
                           const std::optional<Eigen::VectorXd>& pi_hint = std::nullopt);

  int size() const noexcept { return static_cast<int>(rates_.rows()); }
  const Eigen::MatrixXd& rates() const noexcept { return rates_; }
  double rate(int x, int y) const { return rates_(x, y); }
  const Eigen::VectorXd& pi() const noexcept { return pi_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  double max_rate() const noexcept { return max_rate_; }

 private:
  MarkovChain(Eigen::MatrixXd rates, Eigen::VectorXd pi);

  Eigen::MatrixXd rates_;
  Eigen::VectorXd pi_;
  std::vector<Edge> edges_;
  double max_rate_ = 0.0;
};

/// Probability density with respect to pi: rho >= 0, sum rho pi = 1.
class Density {
 public:
  /// Validates nonnegativity and unit mass (tolerance on the mass defect).
  static Density make(const MarkovChain& chain, Eigen::VectorXd values, double tol = 1e-10);
  /// Clamps tiny negative roundoff and rescales to unit mass exactly.
  static Density normalized(const MarkovChain& chain, Eigen::VectorXd values);
  /// The stationary density 1.
  static Density uniform(const MarkovChain& chain);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](int x) const { return values_(x); }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double min() const { return values_.minCoeff(); }
  bool interior() const { return values_.minCoeff() > 0.0; }

 private:
  explicit Density(Eigen::VectorXd values) : values_(std::move(values)) {}
  Eigen::VectorXd values_;
};

/// (Delta psi)(x) = sum_y Q(x,y) (psi(y) - psi(x)).
VertexFunction laplacian(const MarkovChain& chain, const VertexFunction& psi);

/// (grad psi)(x,y) = psi(y) - psi(x).
EdgeFunction gradient(const VertexFunction& psi);

/// (div Psi)(x) = 1/2 sum_y (Psi(x,y) - Psi(y,x)) Q(x,y).
VertexFunction divergence(const MarkovChain& chain, const EdgeFunction& field);

/// <phi, psi>_pi on vertex functions.
double inner_pi(const MarkovChain& chain, const VertexFunction& a, const VertexFunction& b);

/// <Phi, Psi>_pi = 1/2 sum_{x,y} Phi Psi Q(x,y) pi(x) over edges.
double inner_pi(const MarkovChain& chain, const EdgeFunction& a, const EdgeFunction& b);

/// <Phi, Psi>_rho with edge weights theta(rho(x), rho(y)).
double inner_rho(const MarkovChain& chain, const WeightFunction& theta, const Density& rho,
                 const EdgeFunction& a, const EdgeFunction& b);

/// sum_x psi(x) pi(x).
double pi_mean(const MarkovChain& chain, const VertexFunction& psi);

void check_dimension(const MarkovChain& chain, Eigen::Index size, const char* what);

}  // namespace dpme
