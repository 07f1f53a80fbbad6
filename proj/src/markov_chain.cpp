#include "dpme/markov_chain.hpp"

#include <cmath>
#include <sstream>

#include "dpme/weights.hpp"

namespace dpme {

namespace {

bool strongly_connected(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y = 0; y < n; ++y) {
        const double r = transpose ? q(y, x) : q(x, y);
        if (y != x && r > 0.0 && !seen[y]) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace

MarkovChain::MarkovChain(Eigen::MatrixXd rates, Eigen::VectorXd pi)
    : rates_(std::move(rates)), pi_(std::move(pi)) {
  const int n = size();
  max_rate_ = rates_.cwiseAbs().maxCoeff();
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      if (rates_(x, y) > 0.0) {
        edges_.push_back({x, y, 0.5 * (rates_(x, y) * pi_(x) + rates_(y, x) * pi_(y))});
      }
    }
  }
}

MarkovChain MarkovChain::build(const Eigen::MatrixXd& q,
                               const std::optional<Eigen::VectorXd>& pi_hint) {
  const Eigen::Index n = q.rows();
  if (n < 2 || q.cols() != n) {
    throw Error(ErrorCode::NotAQMatrix, "rate matrix must be square with at least 2 states");
  }
  if (!q.allFinite()) {
    throw Error(ErrorCode::NotAQMatrix, "rate matrix has non-finite entries");
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x != y && q(x, y) < 0.0) {
        std::ostringstream os;
        os << "negative off-diagonal rate Q(" << x << "," << y << ") = " << q(x, y);
        throw Error(ErrorCode::NotAQMatrix, os.str());
      }
    }
    const double row = q.row(x).sum();
    if (std::abs(row) > 1e-12 * scale) {
      std::ostringstream os;
      os << "row " << x << " sums to " << row;
      throw Error(ErrorCode::NotAQMatrix, os.str());
    }
  }
  if (!strongly_connected(q)) {
    throw Error(ErrorCode::NotIrreducible, "rate graph is not strongly connected");
  }

  // pi Q = 0 with sum pi = 1: replace one equation of Q^T pi = 0 by the
  // normalization.
  Eigen::MatrixXd system = q.transpose();
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  if (!(pi.minCoeff() > 0.0)) {
    throw Error(ErrorCode::NotIrreducible, "stationary measure is not strictly positive");
  }
  pi /= pi.sum();

  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double residual = std::abs(q(x, y) * pi(x) - q(y, x) * pi(y));
      if (residual > 1e-10 * scale) {
        std::ostringstream os;
        os << "detailed balance fails on (" << x << "," << y << "): residual " << residual;
        throw Error(ErrorCode::NotReversible, os.str());
      }
    }
  }
  if (pi_hint) {
    if (pi_hint->size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "supplied pi has wrong length");
    }
    const double gap = (*pi_hint - pi).cwiseAbs().maxCoeff();
    if (gap > 1e-10) {
      std::ostringstream os;
      os << "supplied pi differs from the stationary measure of Q by " << gap;
      throw Error(ErrorCode::NotReversible, os.str());
    }
  }
  return MarkovChain(q, std::move(pi));
}

void check_dimension(const MarkovChain& chain, Eigen::Index size, const char* what) {
  if (size != chain.size()) {
    std::ostringstream os;
    os << what << " has length " << size << ", chain has " << chain.size() << " states";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

Density Density::make(const MarkovChain& chain, Eigen::VectorXd values, double tol) {
  check_dimension(chain, values.size(), "density");
  if (!values.allFinite() || values.minCoeff() < 0.0) {
    throw Error(ErrorCode::InvalidDensity, "density must be finite and nonnegative");
  }
  const double mass = values.dot(chain.pi());
  if (std::abs(mass - 1.0) > tol) {
    std::ostringstream os;
    os << "density has mass " << mass << " (expected 1)";
    throw Error(ErrorCode::InvalidDensity, os.str());
  }
  return Density(std::move(values));
}

Density Density::normalized(const MarkovChain& chain, Eigen::VectorXd values) {
  check_dimension(chain, values.size(), "density");
  values = values.cwiseMax(0.0);
  const double mass = values.dot(chain.pi());
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::InvalidDensity, "cannot normalize a density with zero mass");
  }
  return Density(values / mass);
}

Density Density::uniform(const MarkovChain& chain) {
  return Density(Eigen::VectorXd::Ones(chain.size()));
}

VertexFunction laplacian(const MarkovChain& chain, const VertexFunction& psi) {
  check_dimension(chain, psi.size(), "vertex function");
  // Row sums vanish, so Q psi already equals sum_y Q(x,y)(psi(y) - psi(x)).
  const auto& q = chain.rates();
  VertexFunction out(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    double acc = 0.0;
    for (int y = 0; y < chain.size(); ++y) {
      if (y != x) acc += q(x, y) * (psi(y) - psi(x));
    }
    out(x) = acc;
  }
  return out;
}

EdgeFunction gradient(const VertexFunction& psi) {
  const Eigen::Index n = psi.size();
  EdgeFunction g(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) g(x, y) = psi(y) - psi(x);
  }
  return g;
}

VertexFunction divergence(const MarkovChain& chain, const EdgeFunction& field) {
  check_dimension(chain, field.rows(), "edge function");
  check_dimension(chain, field.cols(), "edge function");
  VertexFunction out = VertexFunction::Zero(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    for (int y = 0; y < chain.size(); ++y) {
      const double q = chain.rate(x, y);
      if (y != x && q > 0.0) out(x) += 0.5 * (field(x, y) - field(y, x)) * q;
    }
  }
  return out;
}

double inner_pi(const MarkovChain& chain, const VertexFunction& a, const VertexFunction& b) {
  check_dimension(chain, a.size(), "vertex function");
  check_dimension(chain, b.size(), "vertex function");
  return (a.array() * b.array() * chain.pi().array()).sum();
}

double inner_pi(const MarkovChain& chain, const EdgeFunction& a, const EdgeFunction& b) {
  check_dimension(chain, a.rows(), "edge function");
  check_dimension(chain, b.rows(), "edge function");
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x) {
    for (int y = 0; y < chain.size(); ++y) {
      const double q = chain.rate(x, y);
      if (y != x && q > 0.0) acc += a(x, y) * b(x, y) * q * chain.pi()(x);
    }
  }
  return 0.5 * acc;
}

double inner_rho(const MarkovChain& chain, const WeightFunction& theta, const Density& rho,
                 const EdgeFunction& a, const EdgeFunction& b) {
  check_dimension(chain, rho.size(), "density");
  check_dimension(chain, a.rows(), "edge function");
  check_dimension(chain, b.rows(), "edge function");
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x) {
    for (int y = 0; y < chain.size(); ++y) {
      const double q = chain.rate(x, y);
      if (y == x || q <= 0.0) continue;
      const double prod = a(x, y) * b(x, y);
      if (prod == 0.0) continue;
      acc += prod * theta(rho[x], rho[y]) * q * chain.pi()(x);
    }
  }
  return 0.5 * acc;
}

double pi_mean(const MarkovChain& chain, const VertexFunction& psi) {
  check_dimension(chain, psi.size(), "vertex function");
  return psi.dot(chain.pi());
}

}  // namespace dpme
