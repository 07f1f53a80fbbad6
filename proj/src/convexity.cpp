#include "dpme/convexity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dpme/flow.hpp"

namespace dpme {

namespace {

void require_interior(const Density& rho) {
  if (!rho.interior()) {
    throw Error(ErrorCode::BoundaryEvaluation, "Hessian form needs an interior density");
  }
}

// Adds c (e_x - e_y)(e_x - e_y)^T.
void add_edge(Eigen::MatrixXd& m, int x, int y, double c) {
  m(x, x) += c;
  m(y, y) += c;
  m(x, y) -= c;
  m(y, x) -= c;
}

}  // namespace

double hessian_form(const MarkovChain& chain, const EntropyPair& pair, const WeightFunction& theta,
                    const Density& rho, const VertexFunction& psi) {
  check_dimension(chain, rho.size(), "density");
  check_dimension(chain, psi.size(), "vertex function");
  require_interior(rho);
  const int n = chain.size();
  const VertexFunction lap_phi = laplacian(chain, apply_phi(pair, rho.values()));
  const VertexFunction lap_psi = laplacian(chain, psi);
  VertexFunction g(n);
  for (int x = 0; x < n; ++x) g(x) = pair.dphi(rho[x]) * lap_psi(x);

  EdgeFunction dhat(n, n), rho_hat(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y || chain.rate(x, y) <= 0.0) {
        dhat(x, y) = rho_hat(x, y) = 0.0;
        continue;
      }
      const WeightJet j = theta.jet(rho[x], rho[y]);
      dhat(x, y) = j.d1 * lap_phi(x) + j.d2 * lap_phi(y);
      rho_hat(x, y) = j.value;
    }
  }
  const EdgeFunction grad_psi = gradient(psi);
  const EdgeFunction grad_g = gradient(g);
  return 0.5 * inner_pi(chain, EdgeFunction(dhat.cwiseProduct(grad_psi)), grad_psi) -
         inner_pi(chain, EdgeFunction(rho_hat.cwiseProduct(grad_psi)), grad_g);
}

double hessian_form_expanded(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const Density& rho,
                             const VertexFunction& psi) {
  check_dimension(chain, rho.size(), "density");
  check_dimension(chain, psi.size(), "vertex function");
  require_interior(rho);
  const int n = chain.size();
  const auto& q = chain.rates();
  const auto& pi = chain.pi();
  double first = 0.0;
  double second = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y || q(x, y) <= 0.0) continue;
      const WeightJet j = theta.jet(rho[x], rho[y]);
      const double dpsi = psi(x) - psi(y);
      for (int z = 0; z < n; ++z) {
        const double qxz = z == x ? 0.0 : q(x, z);
        const double qyz = z == y ? 0.0 : q(y, z);
        first += dpsi * dpsi * q(x, y) * pi(x) *
                 (j.d1 * (pair.phi(rho[z]) - pair.phi(rho[x])) * qxz +
                  j.d2 * (pair.phi(rho[z]) - pair.phi(rho[y])) * qyz);
        second += dpsi * j.value * q(x, y) * pi(x) *
                  (pair.dphi(rho[x]) * qxz * (psi(z) - psi(x)) -
                   pair.dphi(rho[y]) * qyz * (psi(z) - psi(y)));
      }
    }
  }
  return 0.25 * first - 0.5 * second;
}

HessianReport hessian_report(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const Density& rho) {
  check_dimension(chain, rho.size(), "density");
  require_interior(rho);
  const int n = chain.size();
  const VertexFunction lap_phi = laplacian(chain, apply_phi(pair, rho.values()));
  Eigen::MatrixXd l1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd lrho = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : chain.edges()) {
    const WeightJet j = theta.jet(rho[e.x], rho[e.y]);
    add_edge(l1, e.x, e.y, 0.5 * (j.d1 * lap_phi(e.x) + j.d2 * lap_phi(e.y)) * e.w);
    add_edge(lrho, e.x, e.y, j.value * e.w);
  }
  Eigen::VectorXd dphi(n);
  for (int x = 0; x < n; ++x) dphi(x) = pair.dphi(rho[x]);
  const Eigen::MatrixXd cross = lrho * dphi.asDiagonal() * chain.rates();

  HessianReport rep;
  rep.rho = rho.values();
  rep.b_matrix = l1 - 0.5 * (cross + cross.transpose());
  rep.a_matrix = lrho;

  // Orthonormal basis of the complement of constants.
  const Eigen::MatrixXd full =
      Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::VectorXd::Ones(n)).householderQ();
  const Eigen::MatrixXd u = full.rightCols(n - 1);
  const Eigen::MatrixXd bb = u.transpose() * rep.b_matrix * u;
  const Eigen::MatrixXd ab = u.transpose() * rep.a_matrix * u;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(bb, ab);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSolve, "A(rho, .) is not positive definite off the constants");
  }
  rep.lambda = ges.eigenvalues()(0);
  rep.psi = u * ges.eigenvectors().col(0);
  rep.psi.array() -= rep.psi.dot(chain.pi());
  return rep;
}

double entropy_second_derivative(const MarkovChain& chain, const EntropyPair& pair,
                                 const WeightFunction& theta, const Density& rho,
                                 const VertexFunction& psi, double h) {
  if (!(h > 0.0)) h = 0.02 / (1.0 + chain.max_rate());
  GeodesicOptions g;
  g.n_out = 3;
  g.rtol = 1e-12;
  g.atol = 1e-14;
  g.interior_floor = 0.0;
  const auto fwd = geodesic_shoot(chain, theta, rho, psi, 2.0 * h, g);
  const auto bwd = geodesic_shoot(chain, theta, rho, -psi, 2.0 * h, g);
  auto f = [&](const Eigen::VectorXd& r) {
    double acc = 0.0;
    for (int x = 0; x < chain.size(); ++x) acc += pair.f(r(x)) * chain.pi()(x);
    return acc;
  };
  const double f0 = f(rho.values());
  return (-f(fwd[2].rho) + 16.0 * f(fwd[1].rho) - 30.0 * f0 + 16.0 * f(bwd[1].rho) -
          f(bwd[2].rho)) /
         (12.0 * h * h);
}

namespace {

struct SimplexMap {
  const MarkovChain& chain;
  double floor;

  // y in R^{n-1} -> density floor + (1 - floor) softmax_pi(y, 0).
  Eigen::VectorXd density(const Eigen::VectorXd& y) const {
    const int n = chain.size();
    Eigen::VectorXd e(n);
    const double shift = std::max(0.0, y.maxCoeff());
    for (int x = 0; x < n - 1; ++x) e(x) = std::exp(y(x) - shift);
    e(n - 1) = std::exp(-shift);
    e /= e.dot(chain.pi());
    return (floor + (1.0 - floor) * e.array()).matrix();
  }

  Eigen::VectorXd coords(Eigen::VectorXd rho) const {
    const int n = chain.size();
    rho = rho.cwiseMax(2.0 * floor);
    const Eigen::VectorXd r = ((rho.array() - floor) / (1.0 - floor)).matrix();
    Eigen::VectorXd y(n - 1);
    for (int x = 0; x < n - 1; ++x) y(x) = std::log(r(x)) - std::log(r(n - 1));
    return y;
  }
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  bool converged;
};

template <class Fn>
NelderMeadResult nelder_mead(Fn&& fn, const Eigen::VectorXd& x0, double step, int max_evals) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  for (int i = 0; i < d; ++i) pts[i + 1](i) += step;
  int evals = 0;
  for (int i = 0; i <= d; ++i) {
    vals[i] = fn(pts[i]);
    ++evals;
  }
  std::vector<int> order(d + 1);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[d - 1];
    double size = 0.0;
    for (int i = 0; i <= d; ++i) size = std::max(size, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    if (std::abs(vals[worst] - vals[best]) <= 1e-12 * (1.0 + std::abs(vals[best])) && size < 1e-7) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i <= d; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= d;
    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = fn(xr);
    ++evals;
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = fn(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = fn(xc);
    ++evals;
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (int i = 0; i <= d; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = fn(pts[i]);
      ++evals;
    }
  }
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals, converged};
}

// Golden-section minimization of a unimodal function on [a, b].
template <class Fn>
std::pair<double, double> golden_section(Fn&& fn, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

KappaEstimate kappa_estimate(const MarkovChain& chain, const EntropyPair& pair,
                             const WeightFunction& theta, const KappaOptions& opts) {
  const int n = chain.size();
  if (!(opts.floor > 0.0 && opts.floor < 1e-2)) {
    throw Error(ErrorCode::ConfigError, "kappa search floor must lie in (0, 1e-2)");
  }
  auto lambda_at = [&](const Eigen::VectorXd& rho) {
    try {
      return hessian_report(chain, pair, theta, Density::normalized(chain, rho)).lambda;
    } catch (const Error&) {
      return kInfinity;
    }
  };

  KappaEstimate out;
  Eigen::VectorXd best_rho = Eigen::VectorXd::Ones(n);
  double best = lambda_at(best_rho);

  if (n == 2) {
    // rho_a = sigmoid(s) / pi_a parametrizes the open segment.
    const double pa = chain.pi()(0);
    const double pb = chain.pi()(1);
    auto rho_of = [&](double s) {
      const double u = 1.0 / (1.0 + std::exp(-s));
      Eigen::VectorXd r(2);
      r << u / pa, (1.0 - u) / pb;
      return r;
    };
    const double lim = -std::log(opts.floor);
    const int m = 20001;
    const double h = 2.0 * lim / (m - 1);
    int arg = -1;
    const double initial = best;
    for (int i = 0; i < m; ++i) {
      const double v = lambda_at(rho_of(-lim + i * h));
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    if (arg >= 0) {
      const double s0 = -lim + arg * h;
      const auto [s, v] = golden_section([&](double t) { return lambda_at(rho_of(t)); },
                                         s0 - h, s0 + h, 1e-10);
      if (v < best) {
        best = v;
        best_rho = rho_of(s);
      } else {
        best_rho = rho_of(s0);
      }
    }
    out.starts.push_back({0, initial, best, m, true});
  } else {
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Ones(n));
    for (int v = 0; v < n && static_cast<int>(starts.size()) < opts.starts; ++v) {
      Eigen::VectorXd r = Eigen::VectorXd::Constant(n, opts.vertex_eps);
      const double rest = opts.vertex_eps * (1.0 - chain.pi()(v));
      r(v) = (1.0 - rest) / chain.pi()(v);
      starts.push_back(r);
    }
    if (static_cast<int>(starts.size()) < opts.starts) {
      if (!opts.seeded) {
        throw Error(ErrorCode::ConfigError, "random kappa starts need an explicit seed");
      }
      std::mt19937_64 rng(opts.seed);
      std::gamma_distribution<double> gamma(1.0, 1.0);
      while (static_cast<int>(starts.size()) < opts.starts) {
        Eigen::VectorXd w(n);
        for (int x = 0; x < n; ++x) w(x) = gamma(rng);
        // Dirichlet weights are probabilities; densities divide by pi.
        w /= w.sum();
        starts.push_back((w.array() / chain.pi().array()).matrix());
      }
    }
    const SimplexMap map{chain, opts.floor};
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const Eigen::VectorXd y0 = map.coords(starts[i]);
      const double initial = lambda_at(map.density(y0));
      const NelderMeadResult nm = nelder_mead(
          [&](const Eigen::VectorXd& y) { return lambda_at(map.density(y)); }, y0, 0.5,
          opts.max_evaluations);
      out.starts.push_back({static_cast<int>(i), initial, nm.value, nm.evaluations, nm.converged});
      out.converged = out.converged && nm.converged;
      if (nm.value < best) {
        best = nm.value;
        best_rho = map.density(nm.x);
      }
    }
  }
  out.upper = best;
  out.best = hessian_report(chain, pair, theta, Density::normalized(chain, best_rho));
  return out;
}

TwoPointKappa two_point_kappa(double p, double q, const EntropyPair& pair,
                              const WeightFunction& theta) {
  if (!(p > 0.0 && q > 0.0)) throw Error(ErrorCode::ConfigError, "two-point rates must be positive");
  auto g = [&](double alpha) {
    const double r = (p + q) * (1.0 - alpha) / (2.0 * q);
    const double s = (p + q) * (1.0 + alpha) / (2.0 * p);
    const double v = 0.5 * (p * pair.dphi(r) + q * pair.dphi(s) +
                            theta(r, s) * (p * pair.d2f(r) + q * pair.d2f(s)));
    return std::isfinite(v) ? v : kInfinity;
  };
  const int m = 100000;
  const double h = 2.0 / m;
  int arg = 0;
  double best = kInfinity;
  for (int i = 0; i < m; ++i) {
    const double v = g(-1.0 + (i + 0.5) * h);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  const double center = -1.0 + (arg + 0.5) * h;
  const double lo = std::max(center - h, -1.0 + 0.25 * h);
  const double hi = std::min(center + h, 1.0 - 0.25 * h);
  const auto [alpha, v] = golden_section(g, lo, hi, 1e-12);
  TwoPointKappa out;
  out.value = std::min(v, best);
  out.alpha = v < best ? alpha : center;
  out.at_boundary = arg == 0 || arg == m - 1;
  return out;
}

TwoPointKappa two_point_kappa(double p, double q, const EntropyPair& pair) {
  return two_point_kappa(p, q, pair, matched_weight(pair));
}

MarkovChain cycle_chain(int n, double q) {
  if (n < 2 || !(q > 0.0)) throw Error(ErrorCode::ConfigError, "cycle needs N >= 2 and q > 0");
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    rates(x, (x + 1) % n) += q;
    rates(x, (x + n - 1) % n) += q;
  }
  for (int x = 0; x < n; ++x) rates(x, x) = -2.0 * q;
  return MarkovChain::build(rates);
}

MarkovChain two_point_chain(double p, double q) {
  if (!(p > 0.0 && q > 0.0)) throw Error(ErrorCode::ConfigError, "two-point rates must be positive");
  Eigen::MatrixXd rates(2, 2);
  rates << -p, p, q, -q;
  return MarkovChain::build(rates);
}

CounterexampleRow circle_counterexample(int n, double q, double eps) {
  if (n < 6 || !(q > 0.0) || !(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::ConfigError, "counterexample needs N >= 6, q > 0, 0 < eps < 1");
  }
  const MarkovChain chain = cycle_chain(n, q);
  const EntropyPair pair = EntropyPair::renyi(2.0);
  const WeightFunction theta = WeightFunction::power(2.0);
  VertexFunction psi = VertexFunction::Constant(n, 2.0);
  psi(0) = 0.0;
  psi(1) = 1.0;
  psi(n - 1) = 0.0;
  Eigen::VectorXd r = Eigen::VectorXd::Constant(n, eps);
  r(1) = n - (n - 1) * eps;
  const Density rho = Density::make(chain, r);
  CounterexampleRow row{n, q, eps, 0.0, 0.0, 0.0};
  row.a = action(chain, theta, rho, psi);
  row.b = hessian_form(chain, pair, theta, rho, psi);
  row.ratio = row.b / row.a;
  return row;
}

FwiResidual check_fwi(const MarkovChain& chain, const EntropyPair& pair, const WeightFunction& theta,
                      const Density& rho, double kappa, const DistanceOptions& opts) {
  const Density one = Density::uniform(chain);
  FwiResidual out;
  out.distance = distance(chain, theta, rho, one, opts).value;
  out.entropy_gap = entropy_value(chain, pair, rho) - entropy_value(chain, pair, one);
  out.dissipation = dissipation(chain, pair, rho);
  if (std::isinf(out.dissipation)) {
    out.residual = -kInfinity;
    return out;
  }
  out.residual = out.entropy_gap - out.distance * std::sqrt(out.dissipation) +
                 0.5 * kappa * out.distance * out.distance;
  return out;
}

double check_edi(const MarkovChain& chain, const EntropyPair& pair, const Density& rho,
                 double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::ConfigError, "EDI constant must be positive");
  const double gap = entropy_value(chain, pair, rho) -
                     entropy_value(chain, pair, Density::uniform(chain));
  const double i = dissipation(chain, pair, rho);
  if (std::isinf(i)) return -kInfinity;
  return gap - i / (2.0 * lambda);
}

std::vector<ContractionRow> contraction_check(const MarkovChain& chain, const EntropyPair& pair,
                                              const WeightFunction& theta, const Density& rho0,
                                              const Density& sigma0, double kappa,
                                              const std::vector<double>& t_grid,
                                              const DistanceOptions& opts) {
  std::vector<double> times = t_grid;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty() || !(times.front() >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "contraction times must be nonnegative");
  }
  if (times.front() > 0.0) times.insert(times.begin(), 0.0);
  const double w0 = distance(chain, theta, rho0, sigma0, opts).value;
  std::vector<ContractionRow> rows;
  if (times.back() == 0.0) {
    rows.push_back({0.0, w0, w0, 0.0});
    return rows;
  }
  PmeOptions po;
  po.output_times = times;
  const Trajectory a = solve_pme(chain, pair, rho0, times.back(), po);
  const Trajectory b = solve_pme(chain, pair, sigma0, times.back(), po);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::find(t_grid.begin(), t_grid.end(), times[i]) == t_grid.end()) continue;
    const double w = i == 0 ? w0 : distance(chain, theta, a.states[i], b.states[i], opts).value;
    const double bound = std::exp(-kappa * times[i]) * w0;
    rows.push_back({times[i], w, bound, w - bound});
  }
  return rows;
}

}  // namespace dpme
