#include "dpme/metric.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ode.hpp"

namespace dpme {

double action(const MarkovChain& chain, const WeightFunction& theta, const Density& rho,
              const VertexFunction& psi) {
  check_dimension(chain, rho.size(), "density");
  check_dimension(chain, psi.size(), "vertex function");
  double acc = 0.0;
  for (const Edge& e : chain.edges()) {
    const double d = psi(e.y) - psi(e.x);
    if (d == 0.0) continue;
    acc += d * d * theta(rho[e.x], rho[e.y]) * e.w;
  }
  return acc;
}

namespace {

// (Q + 1 pi^T) u = rhs; u is pi-mean zero whenever rhs is.
VertexFunction mean_zero_solve(const MarkovChain& chain, const VertexFunction& rhs) {
  const int n = chain.size();
  Eigen::MatrixXd m = chain.rates();
  m += Eigen::VectorXd::Ones(n) * chain.pi().transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  VertexFunction u = lu.solve(rhs);
  const double residual = (m * u - rhs).cwiseAbs().maxCoeff();
  if (!u.allFinite() || residual > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SingularSolve, "Poisson system is singular");
  }
  return u;
}

double dirichlet(const MarkovChain& chain, const VertexFunction& u) {
  double acc = 0.0;
  for (const Edge& e : chain.edges()) {
    const double d = u(e.y) - u(e.x);
    acc += e.w * d * d;
  }
  return acc;
}

}  // namespace

VertexFunction solve_poisson(const MarkovChain& chain, const VertexFunction& psi) {
  check_dimension(chain, psi.size(), "vertex function");
  const double c = pi_mean(chain, psi);
  return mean_zero_solve(chain, psi - VertexFunction::Constant(chain.size(), c));
}

double hminus1_norm(const MarkovChain& chain, const VertexFunction& psi) {
  check_dimension(chain, psi.size(), "vertex function");
  const double c = pi_mean(chain, psi);
  const VertexFunction u = solve_poisson(chain, psi);
  return std::sqrt(c * c + dirichlet(chain, u));
}

namespace {

// Primal barrier Newton method for the discretized transport problem.
//
// Unknowns z = (rho_1 .. rho_{K-1}, F_0 .. F_{K-1}); rho_0, rho_K are data.
// Constraint (k, x):  pi_x (rho_{k+1}(x) - rho_k(x)) + dt sum_e B(x,e) F_{k,e} = 0,
// with B = +1 at the tail x of e = {x < y} and -1 at the head. Summing all
// rows gives the mass balance of the endpoints, so row (K-1, n-1) is dropped.
class TransportSolver {
 public:
  TransportSolver(const MarkovChain& chain, const WeightFunction& theta, const Eigen::VectorXd& rho0,
                  const Eigen::VectorXd& rho1, const DistanceOptions& opts)
      : chain_(chain),
        theta_(theta),
        rho0_(rho0),
        rho1_(rho1),
        opts_(opts),
        n_(chain.size()),
        ne_(static_cast<int>(chain.edges().size())),
        k_(opts.steps),
        dt_(1.0 / opts.steps),
        nrho_((opts.steps - 1) * chain.size()),
        nvar_(nrho_ + opts.steps * ne_),
        nrow_(opts.steps * chain.size() - 1) {
    build_constraints();
  }

  DistanceResult solve() {
    Eigen::VectorXd z = initial_point();
    DistanceResult out;
    out.min_curvature = kInfinity;
    int iterations = 0;
    for (double mu = opts_.barrier_start;; mu *= 0.1) {
      const double mu_eff = std::max(mu, opts_.barrier_end);
      for (int it = 0; it < 100; ++it) {
        if (++iterations > opts_.max_iterations) {
          std::ostringstream os;
          os << "transport solver hit the iteration cap (" << opts_.max_iterations << ")";
          throw Error(ErrorCode::NonConvergence, os.str());
        }
        Eigen::VectorXd grad;
        std::vector<Eigen::Triplet<double>> hess;
        Eigen::VectorXd barrier_diag;
        const double f0 = evaluate(z, mu_eff, &grad, &hess, &barrier_diag);
        const Eigen::VectorXd dz = newton_direction(z, grad, hess, barrier_diag);
        const double decrement = -grad.dot(dz);
        track_curvature(dz, hess, out.min_curvature);
        if (decrement <= std::max(1e-3 * mu_eff, 1e-15 * (1.0 + std::abs(f0)))) break;

        double step = 1.0;
        for (int i = 0; i < nrho_; ++i) {
          if (dz(i) < 0.0) step = std::min(step, 0.99 * z(i) / -dz(i));
        }
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
          const Eigen::VectorXd trial = z + step * dz;
          const double f1 = evaluate(trial, mu_eff, nullptr, nullptr, nullptr);
          if (std::isfinite(f1) && f1 <= f0 - 1e-4 * step * decrement) {
            z = trial;
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;  // no further progress at working precision
      }
      if (mu_eff <= opts_.barrier_end) break;
    }
    out.iterations = iterations;
    out.path = extract_path(z);
    out.value = std::sqrt(std::max(out.path.action, 0.0));
    out.feasibility_residual = residual(z).cwiseAbs().maxCoeff();
    if (!(out.min_curvature < kInfinity)) out.min_curvature = 0.0;
    return out;
  }

 private:
  int rho_index(int k, int x) const { return (k - 1) * n_ + x; }
  int flux_index(int k, int e) const { return nrho_ + k * ne_ + e; }

  double rho_at(const Eigen::VectorXd& z, int k, int x) const {
    if (k == 0) return rho0_(x);
    if (k == k_) return rho1_(x);
    return z(rho_index(k, x));
  }

  void build_constraints() {
    std::vector<Eigen::Triplet<double>> t;
    const auto& pi = chain_.pi();
    for (int k = 0; k < k_; ++k) {
      for (int x = 0; x < n_; ++x) {
        const int row = k * n_ + x;
        if (row >= nrow_) continue;
        if (k + 1 < k_) t.emplace_back(row, rho_index(k + 1, x), pi(x));
        if (k >= 1) t.emplace_back(row, rho_index(k, x), -pi(x));
      }
      for (int e = 0; e < ne_; ++e) {
        const Edge& edge = chain_.edges()[e];
        if (k * n_ + edge.x < nrow_) t.emplace_back(k * n_ + edge.x, flux_index(k, e), dt_);
        if (k * n_ + edge.y < nrow_) t.emplace_back(k * n_ + edge.y, flux_index(k, e), -dt_);
      }
    }
    a_.resize(nrow_, nvar_);
    a_.setFromTriplets(t.begin(), t.end());
  }

  // Residual of every continuity row, including the dropped one.
  Eigen::VectorXd residual(const Eigen::VectorXd& z) const {
    Eigen::VectorXd r(k_ * n_);
    const auto& pi = chain_.pi();
    for (int k = 0; k < k_; ++k) {
      for (int x = 0; x < n_; ++x) r(k * n_ + x) = pi(x) * (rho_at(z, k + 1, x) - rho_at(z, k, x));
      for (int e = 0; e < ne_; ++e) {
        const Edge& edge = chain_.edges()[e];
        r(k * n_ + edge.x) += dt_ * z(flux_index(k, e));
        r(k * n_ + edge.y) -= dt_ * z(flux_index(k, e));
      }
    }
    return r;
  }

  // Linear interpolation in rho with the theta = 1 optimal flux; falls back to
  // a path through the uniform density when the straight line touches the
  // boundary at interior times.
  Eigen::VectorXd initial_point() const {
    Eigen::VectorXd z(nvar_);
    auto fill = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, int k_begin, int k_end) {
      const int len = k_end - k_begin;
      const VertexFunction psi = mean_zero_solve(chain_, a - b);
      for (int k = k_begin; k < k_end; ++k) {
        const double t = static_cast<double>(k + 1 - k_begin) / len;
        if (k + 1 < k_) z.segment(rho_index(k + 1, 0), n_) = (1.0 - t) * a + t * b;
        for (int e = 0; e < ne_; ++e) {
          const Edge& edge = chain_.edges()[e];
          // pi (b - a) / (len dt) + div F = 0
          z(flux_index(k, e)) = edge.w * (psi(edge.y) - psi(edge.x)) / (len * dt_);
        }
      }
    };
    const bool line_interior = ((rho0_ + rho1_).array() > 0.0).all();
    if (line_interior) {
      fill(rho0_, rho1_, 0, k_);
    } else {
      const Eigen::VectorXd one = Eigen::VectorXd::Ones(n_);
      const int mid = k_ / 2;
      fill(rho0_, one, 0, mid);
      fill(one, rho1_, mid, k_);
    }
    return z;
  }

  // Objective dt sum F^2/(w theta(rho_bar)) minus the barrier
  // mu dt sum pi log rho, with optional gradient and Hessian (objective part
  // as triplets, barrier part as a diagonal).
  double evaluate(const Eigen::VectorXd& z, double mu, Eigen::VectorXd* grad,
                  std::vector<Eigen::Triplet<double>>* hess, Eigen::VectorXd* barrier_diag) const {
    const auto& pi = chain_.pi();
    double f = 0.0;
    if (grad) grad->setZero(nvar_);
    if (barrier_diag) barrier_diag->setZero(nvar_);
    if (hess) hess->clear();
    for (int k = 1; k < k_; ++k) {
      for (int x = 0; x < n_; ++x) {
        const int i = rho_index(k, x);
        const double r = z(i);
        if (!(r > 0.0)) return kInfinity;
        f -= mu * dt_ * pi(x) * std::log(r);
        if (grad) (*grad)(i) -= mu * dt_ * pi(x) / r;
        if (barrier_diag) (*barrier_diag)(i) = mu * dt_ * pi(x) / (r * r);
      }
    }
    const bool derivatives = grad != nullptr;
    for (int k = 0; k < k_; ++k) {
      for (int e = 0; e < ne_; ++e) {
        const Edge& edge = chain_.edges()[e];
        const double flux = z(flux_index(k, e));
        const double a = 0.5 * (rho_at(z, k, edge.x) + rho_at(z, k + 1, edge.x));
        const double b = 0.5 * (rho_at(z, k, edge.y) + rho_at(z, k + 1, edge.y));
        const double c = dt_ / edge.w;
        if (!derivatives) {
          if (flux == 0.0) continue;
          const double th = theta_(a, b);
          if (!(th > 0.0)) return kInfinity;
          f += c * flux * flux / th;
          continue;
        }
        const WeightJet j = theta_.jet(a, b);
        if (!(j.value > 0.0)) return kInfinity;
        const double th = j.value;
        const double th2 = th * th;
        const double th3 = th2 * th;
        f += c * flux * flux / th;

        // Local gradient and Hessian in (F, a, b).
        const double gf = 2.0 * c * flux / th;
        const double ga = -c * flux * flux * j.d1 / th2;
        const double gb = -c * flux * flux * j.d2 / th2;
        Eigen::Matrix3d h;
        h(0, 0) = 2.0 * c / th;
        h(0, 1) = h(1, 0) = -2.0 * c * flux * j.d1 / th2;
        h(0, 2) = h(2, 0) = -2.0 * c * flux * j.d2 / th2;
        h(1, 1) = c * flux * flux * (2.0 * j.d1 * j.d1 / th3 - j.d11 / th2);
        h(2, 2) = c * flux * flux * (2.0 * j.d2 * j.d2 / th3 - j.d22 / th2);
        h(1, 2) = h(2, 1) = c * flux * flux * (2.0 * j.d1 * j.d2 / th3 - j.d12 / th2);

        // Map (F, a, b) back to the free unknowns; a and b are midpoints.
        int idx[5];
        double jac[3][5] = {};
        int cnt = 0;
        idx[cnt] = flux_index(k, e);
        jac[0][cnt++] = 1.0;
        for (int kk : {k, k + 1}) {
          if (kk == 0 || kk == k_) continue;
          idx[cnt] = rho_index(kk, edge.x);
          jac[1][cnt++] = 0.5;
          idx[cnt] = rho_index(kk, edge.y);
          jac[2][cnt++] = 0.5;
        }
        const double gl[3] = {gf, ga, gb};
        for (int p = 0; p < cnt; ++p) {
          double g = 0.0;
          for (int u = 0; u < 3; ++u) g += jac[u][p] * gl[u];
          (*grad)(idx[p]) += g;
        }
        if (hess) {
          for (int p = 0; p < cnt; ++p) {
            for (int q = 0; q < cnt; ++q) {
              double v = 0.0;
              for (int u = 0; u < 3; ++u) {
                if (jac[u][p] == 0.0) continue;
                for (int w = 0; w < 3; ++w) v += jac[u][p] * h(u, w) * jac[w][q];
              }
              if (v != 0.0) hess->emplace_back(idx[p], idx[q], v);
            }
          }
        }
      }
    }
    return f;
  }

  Eigen::VectorXd newton_direction(const Eigen::VectorXd& z, const Eigen::VectorXd& grad,
                                   const std::vector<Eigen::Triplet<double>>& hess,
                                   const Eigen::VectorXd& barrier_diag) const {
    const int dim = nvar_ + nrow_;
    std::vector<Eigen::Triplet<double>> t(hess);
    t.reserve(hess.size() + nvar_ + 2 * a_.nonZeros());
    for (int i = 0; i < nvar_; ++i) {
      if (barrier_diag(i) != 0.0) t.emplace_back(i, i, barrier_diag(i));
    }
    for (int col = 0; col < a_.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, col); it; ++it) {
        t.emplace_back(nvar_ + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), nvar_ + it.row(), it.value());
      }
    }
    Eigen::SparseMatrix<double> kkt(dim, dim);
    kkt.setFromTriplets(t.begin(), t.end());
    kkt.makeCompressed();
    Eigen::VectorXd rhs(dim);
    rhs.head(nvar_) = -grad;
    rhs.tail(nrow_) = -residual(z).head(nrow_);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(kkt);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularSolve, "KKT factorization failed: " + lu.lastErrorMessage());
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) throw Error(ErrorCode::SingularSolve, "KKT solve produced non-finite values");
    return sol.head(nvar_);
  }

  void track_curvature(const Eigen::VectorXd& dz, const std::vector<Eigen::Triplet<double>>& hess,
                       double& min_curvature) const {
    const double norm2 = dz.squaredNorm();
    if (!(norm2 > 0.0)) return;
    double q = 0.0;
    for (const auto& t : hess) q += dz(t.row()) * t.value() * dz(t.col());
    min_curvature = std::min(min_curvature, q / norm2);
  }

  TransportPath extract_path(const Eigen::VectorXd& z) const {
    TransportPath path;
    path.steps = k_;
    for (int k = 0; k <= k_; ++k) {
      Eigen::VectorXd r(n_);
      for (int x = 0; x < n_; ++x) r(x) = rho_at(z, k, x);
      path.densities.push_back(std::move(r));
    }
    double total = 0.0;
    for (int k = 0; k < k_; ++k) {
      const Eigen::VectorXd mid = 0.5 * (path.densities[k] + path.densities[k + 1]);
      EdgeFunction v = EdgeFunction::Zero(n_, n_);
      Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n_, n_);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
      for (int e = 0; e < ne_; ++e) {
        const Edge& edge = chain_.edges()[e];
        const double flux = z(flux_index(k, e));
        const double th = theta_(mid(edge.x), mid(edge.y));
        v(edge.x, edge.y) = flux / edge.w;
        v(edge.y, edge.x) = -flux / edge.w;
        if (flux != 0.0) total += dt_ * flux * flux / (edge.w * th);
        // Weighted least squares for theta (psi_y - psi_x) = F / w.
        const double c = edge.w * th;
        normal(edge.x, edge.x) += c;
        normal(edge.y, edge.y) += c;
        normal(edge.x, edge.y) -= c;
        normal(edge.y, edge.x) -= c;
        rhs(edge.y) += flux;
        rhs(edge.x) -= flux;
      }
      normal += chain_.pi() * chain_.pi().transpose();
      VertexFunction psi = normal.completeOrthogonalDecomposition().solve(rhs);
      psi.array() -= psi.dot(chain_.pi());
      path.momenta.push_back(std::move(v));
      path.potentials.push_back(std::move(psi));
    }
    path.action = total;
    return path;
  }

  const MarkovChain& chain_;
  const WeightFunction& theta_;
  Eigen::VectorXd rho0_, rho1_;
  DistanceOptions opts_;
  int n_, ne_, k_;
  double dt_;
  int nrho_, nvar_, nrow_;
  Eigen::SparseMatrix<double> a_;
};

}  // namespace

DistanceResult distance(const MarkovChain& chain, const WeightFunction& theta, const Density& rho0,
                        const Density& rho1, const DistanceOptions& opts) {
  check_dimension(chain, rho0.size(), "density");
  check_dimension(chain, rho1.size(), "density");
  if (opts.steps < 4) throw Error(ErrorCode::ConfigError, "distance needs at least 4 time steps");
  const double m0 = rho0.values().dot(chain.pi());
  const double m1 = rho1.values().dot(chain.pi());
  if (std::abs(m0 - m1) > 1e-10) {
    std::ostringstream os;
    os << "endpoint masses differ: " << m0 << " vs " << m1;
    throw Error(ErrorCode::InfeasibleEndpoints, os.str());
  }
  if (rho0.values() == rho1.values()) {
    DistanceResult out;
    out.path.steps = opts.steps;
    for (int k = 0; k <= opts.steps; ++k) out.path.densities.push_back(rho0.values());
    for (int k = 0; k < opts.steps; ++k) {
      out.path.momenta.push_back(EdgeFunction::Zero(chain.size(), chain.size()));
      out.path.potentials.push_back(VertexFunction::Zero(chain.size()));
    }
    return out;
  }
  TransportSolver solver(chain, theta, rho0.values(), rho1.values(), opts);
  return solver.solve();
}

std::vector<GeodesicSample> geodesic_shoot(const MarkovChain& chain, const WeightFunction& theta,
                                           const Density& rho0, const VertexFunction& psi0,
                                           double t_end, const GeodesicOptions& opts) {
  check_dimension(chain, rho0.size(), "density");
  check_dimension(chain, psi0.size(), "vertex function");
  if (!(rho0.min() > opts.interior_floor)) {
    throw Error(ErrorCode::LeftInterior, "geodesic shooting needs an interior initial density");
  }
  if (!(t_end > 0.0) || opts.n_out < 2) {
    throw Error(ErrorCode::ConfigError, "geodesic needs t_end > 0 and at least 2 outputs");
  }
  const int n = chain.size();
  auto rhs = [&](const detail::State& s, detail::State& ds, double) {
    std::fill(ds.begin(), ds.end(), 0.0);
    for (const Edge& e : chain.edges()) {
      const double a = s[e.x];
      const double b = s[e.y];
      const double dpsi = s[n + e.y] - s[n + e.x];
      const WeightJet j = theta.jet(a, b);
      // Mass flow along the edge, as rates per unit pi.
      const double flow = dpsi * j.value * e.w;
      ds[e.x] -= flow / chain.pi()(e.x);
      ds[e.y] += flow / chain.pi()(e.y);
      const double half = 0.5 * dpsi * dpsi * e.w;
      ds[n + e.x] -= half * j.d1 / chain.pi()(e.x);
      ds[n + e.y] -= half * j.d2 / chain.pi()(e.y);
    }
  };
  detail::State x0(2 * n);
  for (int i = 0; i < n; ++i) {
    x0[i] = rho0[i];
    x0[n + i] = psi0(i);
  }
  std::vector<double> outputs(opts.n_out);
  for (int i = 0; i < opts.n_out; ++i) outputs[i] = t_end * i / (opts.n_out - 1);
  detail::OdeSettings settings;
  settings.rtol = opts.rtol;
  settings.atol = opts.atol;
  settings.initial_step = std::min(1e-4, t_end / 10.0);

  std::vector<GeodesicSample> out;
  auto check = [&](detail::State& s) {
    for (int i = 0; i < n; ++i) {
      if (!(s[i] > opts.interior_floor)) {
        std::ostringstream os;
        os << "geodesic left the interior at state " << i;
        throw Error(ErrorCode::LeftInterior, os.str());
      }
    }
    return detail::StepVerdict::Accept;
  };
  auto observe = [&](double t, const detail::State& s) {
    GeodesicSample g;
    g.t = t;
    g.rho = Eigen::Map<const Eigen::VectorXd>(s.data(), n);
    g.psi = Eigen::Map<const Eigen::VectorXd>(s.data() + n, n);
    double a = 0.0;
    for (const Edge& e : chain.edges()) {
      const double d = g.psi(e.y) - g.psi(e.x);
      a += d * d * theta(g.rho(e.x), g.rho(e.y)) * e.w;
    }
    g.action = a;
    out.push_back(std::move(g));
  };
  detail::integrate_to_outputs(rhs, x0, 0.0, outputs, settings, check, observe);
  return out;
}

double MetricHandle::operator()(const MarkovChain& chain, const Density& a, const Density& b) const {
  if (hminus1_) return hminus1_norm(chain, a.values() - b.values());
  return distance(chain, theta_, a, b, opts_).value;
}

}  // namespace dpme
