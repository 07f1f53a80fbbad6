#include "dpme/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dpme {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TorusChain build_torus(int n, int d) {
  if (n < 2 || (d != 1 && d != 2)) {
    throw Error(ErrorCode::ConfigError, "torus needs N >= 2 and d in {1, 2}");
  }
  const int size = d == 1 ? n : n * n;
  const double rate = static_cast<double>(n) * n;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    const int ix = i % n;
    const int iy = i / n;
    for (int dir = 0; dir < d; ++dir) {
      for (int sgn : {-1, 1}) {
        int jx = ix;
        int jy = iy;
        if (dir == 0) jx = (ix + sgn + n) % n;
        else jy = (iy + sgn + n) % n;
        q(i, jx + n * jy) += rate;
      }
    }
    q(i, i) = -2.0 * d * rate;
  }
  return {n, d, MarkovChain::build(q)};
}

CircleDensity::CircleDensity(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
  const std::size_t k = std::max(a_.size(), b_.size());
  a_.resize(k, 0.0);
  b_.resize(k, 0.0);
  const int samples = std::max<int>(4096, 64 * static_cast<int>(k));
  min_ = kInfinity;
  for (int i = 0; i < samples; ++i) min_ = std::min(min_, (*this)(static_cast<double>(i) / samples));
  if (!(min_ > 0.0)) {
    std::ostringstream os;
    os << "circle density is not strictly positive (min " << min_ << ")";
    throw Error(ErrorCode::NonPositive, os.str());
  }
}

double CircleDensity::operator()(double x) const {
  double v = 1.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double w = kTwoPi * (k + 1) * x;
    v += a_[k] * std::cos(w) + b_[k] * std::sin(w);
  }
  return v;
}

double CircleDensity::cdf(double x) const {
  double v = x;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double f = kTwoPi * (k + 1);
    v += (a_[k] * std::sin(f * x) + b_[k] * (1.0 - std::cos(f * x))) / f;
  }
  return v;
}

double CircleDensity::quantile(double u) const {
  const double base = std::floor(u);
  const double frac = u - base;
  // Safeguarded Newton on [0, 1].
  double lo = 0.0;
  double hi = 1.0;
  double x = frac;
  for (int it = 0; it < 100; ++it) {
    const double g = cdf(x) - frac;
    if (g > 0.0) hi = x;
    else lo = x;
    double next = x - g / (*this)(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return base + x;
}

CircleDensity CircleDensity::translated(double t) const {
  std::vector<double> a(a_.size()), b(b_.size());
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double w = kTwoPi * (k + 1) * t;
    // cos(f(x - t)) = cos fx cos ft + sin fx sin ft; sin(f(x - t)) = sin fx cos ft - cos fx sin ft
    a[k] = a_[k] * std::cos(w) - b_[k] * std::sin(w);
    b[k] = a_[k] * std::sin(w) + b_[k] * std::cos(w);
  }
  return CircleDensity(std::move(a), std::move(b));
}

Density discretize(const CircleDensity& rho, const TorusChain& torus) {
  if (torus.d != 1) throw Error(ErrorCode::ConfigError, "discretize supports d = 1 only");
  const int n = torus.n;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = n * (rho.cdf(static_cast<double>(i + 1) / n) - rho.cdf(static_cast<double>(i) / n));
  }
  if (!(v.minCoeff() > 0.0)) throw Error(ErrorCode::NonPositive, "discretized density is not positive");
  return Density::normalized(torus.chain, v);
}

double w2_circle(const CircleDensity& rho0, const CircleDensity& rho1, int resolution) {
  if (resolution < 16) throw Error(ErrorCode::ConfigError, "w2_circle resolution must be >= 16");
  std::vector<double> u(resolution), g0(resolution);
  for (int i = 0; i < resolution; ++i) {
    u[i] = (i + 0.5) / resolution;
    g0[i] = rho0.quantile(u[i]);
  }
  auto cost = [&](double alpha) {
    double acc = 0.0;
    for (int i = 0; i < resolution; ++i) {
      const double d = g0[i] - rho1.quantile(u[i] + alpha);
      acc += d * d;
    }
    return acc / resolution;
  };
  const int scan = 64;
  double best_alpha = -1.0;
  double best = kInfinity;
  for (int i = 0; i <= scan; ++i) {
    const double a = -1.0 + 2.0 * i / scan;
    const double c = cost(a);
    if (c < best) {
      best = c;
      best_alpha = a;
    }
  }
  const double h = 2.0 / scan;
  double lo = std::max(-1.0, best_alpha - h);
  double hi = std::min(1.0, best_alpha + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = cost(c);
  double fd = cost(d);
  while (hi - lo > 1e-12) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = cost(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = cost(d);
    }
  }
  best = std::min({best, fc, fd});
  return std::sqrt(std::max(best, 0.0));
}

std::vector<GhRow> gh_table(double m, const std::vector<int>& sizes, const CircleDensity& rho0,
                            const CircleDensity& rho1, const GhOptions& opts) {
  const WeightFunction theta = WeightFunction::power(m);
  const double w2 = w2_circle(rho0, rho1, opts.resolution);
  std::vector<GhRow> rows;
  for (int n : sizes) {
    const TorusChain torus = build_torus(n, 1);
    DistanceOptions dopts;
    dopts.steps = std::max(opts.min_steps, opts.steps_per_site * n);
    const double wn =
        distance(torus.chain, theta, discretize(rho0, torus), discretize(rho1, torus), dopts).value;
    rows.push_back({n, wn, w2, std::abs(wn - w2)});
  }
  return rows;
}

bool gaps_nonincreasing(const std::vector<GhRow>& rows, double slack) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].gap > (1.0 + slack) * rows[i - 1].gap) return false;
  }
  return true;
}

ThetaGhReport theta_gh_properties(double m, double lo, double hi, int points) {
  const WeightFunction theta = WeightFunction::power(m);
  const WeightFunction harmonic = WeightFunction::harmonic();
  ThetaGhReport rep{m, 0.0, 0.0, -kInfinity};
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  for (double a : grid) {
    rep.diagonal_error = std::max(rep.diagonal_error, std::abs(theta(a, a) - a));
    for (double b : grid) {
      const double th = harmonic(a, b);
      const double lhs = 1.0 / th - 1.0 / theta(a, b);
      const double rhs = (b - a) * (b - a) / (a * b) / th;
      rep.property3_violation = std::max(rep.property3_violation, lhs - rhs);
    }
  }
  rep.max_hessian_eigenvalue = check_weight_properties(theta, lo, hi, points).max_hessian_eigenvalue;
  return rep;
}

}  // namespace dpme
