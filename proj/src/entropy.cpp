#include "dpme/entropy.hpp"

#include <cmath>
#include <sstream>

namespace dpme {

const std::vector<double>& probe_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(256);
    for (int i = 0; i < 256; ++i) g[i] = std::pow(10.0, -6.0 + 12.0 * i / 255.0);
    return g;
  }();
  return grid;
}

EntropyPair::EntropyPair(Kind kind, double exponent, std::string name, Functions fns,
                         bool df_finite_at_zero)
    : kind_(kind),
      exponent_(exponent),
      name_(std::move(name)),
      fns_(std::move(fns)),
      df_finite_at_zero_(df_finite_at_zero) {}

EntropyPair EntropyPair::heat() {
  Functions fns;
  fns.phi = [](double r) { return r; };
  fns.dphi = [](double) { return 1.0; };
  fns.d2phi = [](double) { return 0.0; };
  fns.f = [](double r) { return r > 0.0 ? r * std::log(r) : 0.0; };
  fns.df = [](double r) { return 1.0 + std::log(r); };
  fns.d2f = [](double r) { return 1.0 / r; };
  fns.d3f = [](double r) { return -1.0 / (r * r); };
  return EntropyPair(Kind::Heat, 1.0, "heat", std::move(fns), false);
}

EntropyPair EntropyPair::renyi(double m) {
  if (!(m > 0.0 && m <= 2.0)) {
    std::ostringstream os;
    os << "Renyi entropy requires 0 < m <= 2, got " << m;
    throw Error(ErrorCode::ExponentOutOfRange, os.str());
  }
  if (m == 1.0) return heat();
  Functions fns;
  fns.phi = [m](double r) { return std::pow(r, m); };
  fns.dphi = [m](double r) { return m * std::pow(r, m - 1.0); };
  fns.d2phi = [m](double r) { return m * (m - 1.0) * std::pow(r, m - 2.0); };
  fns.f = [m](double r) { return std::pow(r, m) / (m - 1.0); };
  fns.df = [m](double r) { return m / (m - 1.0) * std::pow(r, m - 1.0); };
  fns.d2f = [m](double r) { return m * std::pow(r, m - 2.0); };
  fns.d3f = [m](double r) { return m * (m - 2.0) * std::pow(r, m - 3.0); };
  std::ostringstream os;
  os << "renyi:" << m;
  return EntropyPair(Kind::Renyi, m, os.str(), std::move(fns), m > 1.0);
}

EntropyPair EntropyPair::hilbertian_identity() {
  Functions fns;
  fns.phi = [](double r) { return r; };
  fns.dphi = [](double) { return 1.0; };
  fns.d2phi = [](double) { return 0.0; };
  fns.f = [](double r) { return 0.5 * r * r; };
  fns.df = [](double r) { return r; };
  fns.d2f = [](double) { return 1.0; };
  fns.d3f = [](double) { return 0.0; };
  return EntropyPair(Kind::Hilbertian, 1.0, "hilbertian:identity", std::move(fns), true);
}

EntropyPair EntropyPair::hilbertian_power(double m) {
  if (!(m > 0.0)) {
    std::ostringstream os;
    os << "hilbertian power requires m > 0, got " << m;
    throw Error(ErrorCode::ExponentOutOfRange, os.str());
  }
  if (m == 1.0) return hilbertian_identity();
  Functions fns;
  fns.phi = [m](double r) { return std::pow(r, m); };
  fns.dphi = [m](double r) { return m * std::pow(r, m - 1.0); };
  fns.d2phi = [m](double r) { return m * (m - 1.0) * std::pow(r, m - 2.0); };
  fns.f = [m](double r) { return std::pow(r, m + 1.0) / (m + 1.0); };
  fns.df = [m](double r) { return std::pow(r, m); };
  fns.d2f = [m](double r) { return m * std::pow(r, m - 1.0); };
  fns.d3f = [m](double r) { return m * (m - 1.0) * std::pow(r, m - 2.0); };
  std::ostringstream os;
  os << "hilbertian:power:" << m;
  return EntropyPair(Kind::Hilbertian, m, os.str(), std::move(fns), true);
}

EntropyPair EntropyPair::custom(std::string name, Functions fns) {
  if (!fns.phi || !fns.dphi || !fns.f || !fns.df || !fns.d2f) {
    throw Error(ErrorCode::ConfigError, "custom entropy pair needs phi, phi', f, f', f''");
  }
  const auto& grid = probe_grid();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(fns.phi(grid[i + 1]) > fns.phi(grid[i]))) {
      throw Error(ErrorCode::NonConvexF, "phi is not strictly increasing on the probe grid");
    }
    if (!(fns.df(grid[i + 1]) > fns.df(grid[i]))) {
      throw Error(ErrorCode::NonConvexF, "f is not strictly convex on the probe grid");
    }
  }
  const bool finite = std::isfinite(fns.df(0.0));
  return EntropyPair(Kind::Custom, 0.0, std::move(name), std::move(fns), finite);
}

double entropy_value(const MarkovChain& chain, const EntropyPair& pair, const Density& rho) {
  check_dimension(chain, rho.size(), "density");
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x) {
    const double v = pair.f(rho[x]);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::BoundaryEvaluation, "entropy integrand is not finite at rho(x)");
    }
    acc += v * chain.pi()(x);
  }
  return acc;
}

double dissipation(const MarkovChain& chain, const EntropyPair& pair, const Density& rho) {
  check_dimension(chain, rho.size(), "density");
  if (!rho.interior() && !pair.df_finite_at_zero()) return kInfinity;
  double acc = 0.0;
  for (const Edge& e : chain.edges()) {
    const double a = rho[e.x];
    const double b = rho[e.y];
    acc += (pair.df(b) - pair.df(a)) * (pair.phi(b) - pair.phi(a)) * e.w;
  }
  return acc;
}

EdgeFunction entropy_gradient(const MarkovChain& chain, const EntropyPair& pair,
                              const Density& rho) {
  check_dimension(chain, rho.size(), "density");
  if (!rho.interior() && !pair.df_finite_at_zero()) {
    throw Error(ErrorCode::BoundaryEvaluation, "f' diverges at 0; gradient needs interior rho");
  }
  VertexFunction fp(chain.size());
  for (int x = 0; x < chain.size(); ++x) fp(x) = pair.df(rho[x]);
  return gradient(fp);
}

WeightFunction matched_weight(const EntropyPair& pair) {
  switch (pair.kind()) {
    case EntropyPair::Kind::Heat: return WeightFunction::logarithmic();
    case EntropyPair::Kind::Renyi: return WeightFunction::power(pair.exponent());
    case EntropyPair::Kind::Hilbertian: return WeightFunction::constant();
    case EntropyPair::Kind::Custom: break;
  }
  return WeightFunction::from_pair(pair);
}

VertexFunction apply_phi(const EntropyPair& pair, const VertexFunction& rho) {
  VertexFunction out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) out(i) = pair.phi(std::max(rho(i), 0.0));
  return out;
}

}  // namespace dpme
