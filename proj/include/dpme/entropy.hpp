#pragma once

#include "dpme/entropy_pair.hpp"
#include "dpme/markov_chain.hpp"
#include "dpme/weights.hpp"

namespace dpme {

/// F(rho) = sum_x f(rho(x)) pi(x).
double entropy_value(const MarkovChain& chain, const EntropyPair& pair, const Density& rho);

/// I(rho) = 1/2 sum_{x,y} [f'(rho(y)) - f'(rho(x))][phi(rho(y)) - phi(rho(x))] Q(x,y) pi(x).
/// Returns kInfinity for a boundary density when f' diverges at 0.
double dissipation(const MarkovChain& chain, const EntropyPair& pair, const Density& rho);

/// Gradient of F in the transport geometry: grad f'(rho). Needs interior rho
/// when f' diverges at 0.
EdgeFunction entropy_gradient(const MarkovChain& chain, const EntropyPair& pair,
                              const Density& rho);

/// Closed-form weight equal to theta_{phi,f} for the shipped pair kinds
/// (log mean for heat, theta_m for Renyi, theta = 1 for Hilbertian pairs);
/// the generic quotient for custom pairs.
WeightFunction matched_weight(const EntropyPair& pair);

/// phi applied entrywise, with phi continuous at 0.
VertexFunction apply_phi(const EntropyPair& pair, const VertexFunction& rho);

}  // namespace dpme
