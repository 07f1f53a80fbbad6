#include "dpme/weights.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dpme/error.hpp"

namespace dpme {

namespace {

// log(sinh(z) / z), even in z.
double log_sinhc(double z) {
  const double a = std::abs(z);
  if (a < 0.25) {
    const double z2 = a * a;
    return z2 * (1.0 / 6.0 + z2 * (-1.0 / 180.0 + z2 * (1.0 / 2835.0 + z2 * (-1.0 / 37800.0))));
  }
  if (a < 20.0) return std::log(std::sinh(a) / a);
  return a - std::numbers::ln2 - std::log(a) + std::log1p(-std::exp(-2.0 * a));
}

// Langevin function coth(z) - 1/z = d/dz log sinhc(z); odd in z.
double langevin(double z) {
  const double a = std::abs(z);
  if (a < 0.25) {
    const double z2 = z * z;
    return z * (1.0 / 3.0 +
                z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 + z2 * (-1.0 / 4725.0 + z2 * (2.0 / 93555.0)))));
  }
  return 1.0 / std::tanh(z) - 1.0 / z;
}

// Derivative of the Langevin function, 1/z^2 - 1/sinh(z)^2; even in z.
double langevin_prime(double z) {
  const double a = std::abs(z);
  if (a < 0.25) {
    const double z2 = z * z;
    return 1.0 / 3.0 +
           z2 * (-1.0 / 15.0 + z2 * (2.0 / 189.0 + z2 * (-1.0 / 675.0 + z2 * (2.0 / 10395.0))));
  }
  const double sh = a < 350.0 ? std::sinh(a) : kInfinity;
  return 1.0 / (a * a) - 1.0 / (sh * sh);
}

struct Kernel {
  double k, k1, k2;
};

// k(u) = sinhc(b u) / sinhc(c u) with b = m/2, c = (m-1)/2.
Kernel power_kernel(double m, double u) {
  const double b = 0.5 * m;
  const double c = 0.5 * (m - 1.0);
  const double k = std::exp(log_sinhc(b * u) - log_sinhc(c * u));
  const double l = b * langevin(b * u) - c * langevin(c * u);
  const double lp = b * b * langevin_prime(b * u) - c * c * langevin_prime(c * u);
  return {k, k * l, k * (l * l + lp)};
}

}  // namespace

WeightFunction WeightFunction::logarithmic() { return WeightFunction(Kind::Logarithmic, 1.0); }

WeightFunction WeightFunction::power(double m) {
  if (!(m > 0.0 && m <= 2.0)) {
    std::ostringstream os;
    os << "power weight requires 0 < m <= 2, got " << m;
    throw Error(ErrorCode::ExponentOutOfRange, os.str());
  }
  if (m == 1.0) return logarithmic();
  return WeightFunction(Kind::Power, m);
}

WeightFunction WeightFunction::harmonic() { return WeightFunction(Kind::Harmonic, -1.0); }

WeightFunction WeightFunction::constant() { return WeightFunction(Kind::Constant, 0.0); }

WeightFunction WeightFunction::from_pair(const EntropyPair& pair) {
  for (double r : probe_grid()) {
    const double h = 1e-3 * r;
    if (!(pair.df(r + h) > pair.df(r - h))) {
      std::ostringstream os;
      os << "f' is not strictly increasing near r = " << r;
      throw Error(ErrorCode::NonConvexF, os.str());
    }
  }
  WeightFunction w(Kind::PairQuotient, 0.0);
  w.pair_ = std::make_shared<const EntropyPair>(pair);
  return w;
}

std::string WeightFunction::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Logarithmic: return "log";
    case Kind::Power: os << "power:" << m_; return os.str();
    case Kind::Harmonic: return "harmonic";
    case Kind::Constant: return "one";
    case Kind::PairQuotient: return "pair(" + pair_->name() + ")";
  }
  return "unknown";
}

double WeightFunction::value(double r, double s) const {
  switch (kind_) {
    case Kind::Constant: return 1.0;
    case Kind::PairQuotient: return pair_value(r, s);
    default: return homogeneous_value(r, s);
  }
}

double WeightFunction::d1(double r, double s) const { return jet(r, s).d1; }

double WeightFunction::d2(double r, double s) const { return jet(r, s).d2; }

WeightJet WeightFunction::jet(double r, double s) const {
  switch (kind_) {
    case Kind::Constant: return {1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    case Kind::PairQuotient: return pair_jet(r, s);
    default: break;
  }
  if (kind_ == Kind::Power && m_ == 2.0) {
    return {0.5 * (r + s), 0.5, 0.5, 0.0, 0.0, 0.0};
  }
  if (!(r > 0.0 && s > 0.0)) {
    throw Error(ErrorCode::BoundaryEvaluation, "weight derivatives requested on the boundary");
  }
  return homogeneous_jet(r, s);
}

double WeightFunction::homogeneous_value(double r, double s) const {
  if (r < 0.0 || s < 0.0) {
    throw Error(ErrorCode::BoundaryEvaluation, "weight evaluated at a negative argument");
  }
  if (r == 0.0 || s == 0.0) {
    // Continuous extension: theta(0, s) = s (m - 1)/m for m > 1, else 0.
    const double other = std::max(r, s);
    return m_ > 1.0 ? other * (m_ - 1.0) / m_ : 0.0;
  }
  if (r == s) return r;
  const double u = std::log(r) - std::log(s);
  return std::sqrt(r) * std::sqrt(s) * power_kernel(m_, u).k;
}

WeightJet WeightFunction::homogeneous_jet(double r, double s) const {
  const double u = std::log(r) - std::log(s);
  const Kernel ker = power_kernel(m_, u);
  const double sr = std::sqrt(r);
  const double ss = std::sqrt(s);
  const double hp = 0.5 * ker.k + ker.k1;
  const double hm = 0.5 * ker.k - ker.k1;
  const double hp1 = 0.5 * ker.k1 + ker.k2;
  const double hm1 = 0.5 * ker.k1 - ker.k2;
  WeightJet j;
  j.value = sr * ss * ker.k;
  j.d1 = (ss / sr) * hp;
  j.d2 = (sr / ss) * hm;
  j.d11 = (ss / sr) / r * (hp1 - 0.5 * hp);
  j.d12 = (0.25 * ker.k - ker.k2) / (sr * ss);
  j.d22 = -(sr / ss) / s * (0.5 * hm + hm1);
  return j;
}

namespace {

// Within this relative band the quotient is evaluated in mean-value form,
//   theta = int_0^1 phi'(x_t) dt / int_0^1 f''(x_t) dt,  x_t = s + t (r - s),
// which has no cancellation as r -> s.
constexpr double kBand = 0.25;
constexpr int kBandNodes = 24;

struct MeanValue {
  double num = 0.0, den = 0.0;
  double num_r = 0.0, num_s = 0.0, den_r = 0.0, den_s = 0.0;
};

MeanValue mean_value(const EntropyPair& p, double r, double s, bool derivs) {
  static const QuadratureRule rule = gauss_legendre_unit(kBandNodes);
  MeanValue mv;
  for (int i = 0; i < kBandNodes; ++i) {
    const double t = rule.nodes[i];
    const double w = rule.weights[i];
    const double x = s + t * (r - s);
    mv.num += w * p.dphi(x);
    mv.den += w * p.d2f(x);
    if (!derivs) continue;
    const double h = 1e-6 * x;
    const double a = p.has_d2phi() ? p.d2phi(x) : (p.dphi(x + h) - p.dphi(x - h)) / (2.0 * h);
    const double b = p.has_d3f() ? p.d3f(x) : (p.d2f(x + h) - p.d2f(x - h)) / (2.0 * h);
    mv.num_r += w * t * a;
    mv.num_s += w * (1.0 - t) * a;
    mv.den_r += w * t * b;
    mv.den_s += w * (1.0 - t) * b;
  }
  return mv;
}

}  // namespace

double WeightFunction::pair_value(double r, double s) const {
  const EntropyPair& p = *pair_;
  if (r < 0.0 || s < 0.0) {
    throw Error(ErrorCode::BoundaryEvaluation, "weight evaluated at a negative argument");
  }
  const double scale = std::max(r, s);
  if (scale == 0.0) return 0.0;
  if (std::abs(r - s) <= kBand * scale) {
    const MeanValue mv = mean_value(p, r, s, false);
    return mv.num / mv.den;
  }
  const double den = p.df(r) - p.df(s);
  if (std::isinf(den)) return 0.0;  // f'(0) = -infinity
  return (p.phi(r) - p.phi(s)) / den;
}

WeightJet WeightFunction::pair_jet(double r, double s) const {
  const EntropyPair& p = *pair_;
  if (!(r > 0.0 && s > 0.0)) {
    throw Error(ErrorCode::BoundaryEvaluation, "weight derivatives requested on the boundary");
  }
  auto first = [&](double a, double b) {
    if (std::abs(a - b) <= kBand * std::max(a, b)) {
      const MeanValue mv = mean_value(p, a, b, true);
      const double d2 = mv.den * mv.den;
      return std::pair{(mv.num_r * mv.den - mv.num * mv.den_r) / d2,
                       (mv.num_s * mv.den - mv.num * mv.den_s) / d2};
    }
    const double den = p.df(a) - p.df(b);
    const double theta = (p.phi(a) - p.phi(b)) / den;
    return std::pair{(p.dphi(a) - theta * p.d2f(a)) / den, (theta * p.d2f(b) - p.dphi(b)) / den};
  };
  WeightJet j;
  j.value = pair_value(r, s);
  std::tie(j.d1, j.d2) = first(r, s);
  // Second derivatives by central differences of the first ones.
  const double hr = 1e-5 * r;
  const double hs = 1e-5 * s;
  j.d11 = (first(r + hr, s).first - first(r - hr, s).first) / (2.0 * hr);
  j.d22 = (first(r, s + hs).second - first(r, s - hs).second) / (2.0 * hs);
  j.d12 = 0.5 * ((first(r, s + hs).first - first(r, s - hs).first) / (2.0 * hs) +
                 (first(r + hr, s).second - first(r - hr, s).second) / (2.0 * hr));
  return j;
}

QuadratureRule gauss_legendre_unit(int points) {
  if (points < 1) throw Error(ErrorCode::ConfigError, "quadrature needs at least one point");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int n = points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

double theta_power_integral(double m, double r, double s, int quad_points) {
  if (!(m > 0.0 && m <= 2.0)) {
    std::ostringstream os;
    os << "integral representation requires 0 < m <= 2, got " << m;
    throw Error(ErrorCode::ExponentOutOfRange, os.str());
  }
  if (!(r > 0.0 && s > 0.0)) {
    throw Error(ErrorCode::BoundaryEvaluation, "integral representation needs r, s > 0");
  }
  if (quad_points < 2) throw Error(ErrorCode::ConfigError, "quad_points must be >= 2");
  const QuadratureRule rule = gauss_legendre_unit(quad_points);
  if (m == 1.0) {
    // limit of the integrand: r^{1-t} s^t
    double acc = 0.0;
    for (int i = 0; i < quad_points; ++i) acc += rule.weights[i] * r * std::pow(s / r, rule.nodes[i]);
    return acc;
  }
  const double a = std::pow(r, m - 1.0);
  const double b = std::pow(s, m - 1.0);
  const double expo = 1.0 / (m - 1.0);
  double acc = 0.0;
  for (int i = 0; i < quad_points; ++i) {
    const double t = rule.nodes[i];
    acc += rule.weights[i] * std::pow((1.0 - t) * a + t * b, expo);
  }
  return acc;
}

WeightPropertyReport check_weight_properties(const WeightFunction& theta, double lo, double hi,
                                             int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  }
  WeightPropertyReport rep;
  rep.min_interior_value = kInfinity;
  rep.symmetry_gap = 0.0;
  rep.monotonicity_violation = -kInfinity;
  rep.max_hessian_eigenvalue = -kInfinity;
  rep.doubling_violation = -kInfinity;
  for (double r : grid) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double s = grid[j];
      const double v = theta(r, s);
      rep.symmetry_gap = std::max(rep.symmetry_gap, std::abs(v - theta(s, r)));
      rep.min_interior_value = std::min(rep.min_interior_value, v);
      if (j + 1 < grid.size()) {
        rep.monotonicity_violation = std::max(rep.monotonicity_violation, v - theta(r, grid[j + 1]));
      }
      rep.doubling_violation = std::max(rep.doubling_violation, theta(2 * r, 2 * s) - 2 * v);

      const WeightJet jt = theta.jet(r, s);
      Eigen::Matrix2d h;
      h << jt.d11, jt.d12, jt.d12, jt.d22;
      rep.max_hessian_eigenvalue = std::max(
          rep.max_hessian_eigenvalue, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues()(1));

      const double hr = 1e-6 * r;
      const double hs = 1e-6 * s;
      const double fd1 = (theta(r + hr, s) - theta(r - hr, s)) / (2 * hr);
      const double fd2 = (theta(r, s + hs) - theta(r, s - hs)) / (2 * hs);
      const double scale1 = std::max(std::abs(fd1), v / r);
      const double scale2 = std::max(std::abs(fd2), v / s);
      rep.derivative_mismatch = std::max(
          {rep.derivative_mismatch, std::abs(jt.d1 - fd1) / scale1, std::abs(jt.d2 - fd2) / scale2});
    }
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  rep.c_theta = integrator.integrate(
      [&](double x) { return 1.0 / std::sqrt(theta(1.0 - x, 1.0 + x)); }, 0.0, 1.0);
  return rep;
}

}  // namespace dpme
