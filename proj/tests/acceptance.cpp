// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dpme/convexity.hpp"
#include "dpme/flow.hpp"
#include "dpme/metric.hpp"
#include "dpme/torus.hpp"
#include "support.hpp"

using namespace dpme;
using dpme::testing::random_chain;
using dpme::testing::random_density;
using dpme::testing::random_vector;
using dpme::testing::vec;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. kappa on the symmetric two-point chain with the heat pair.
Outcome two_point_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const TwoPointKappa k = two_point_kappa(1.0, 1.0, EntropyPair::heat());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::abs(k.value - 2.0) <= 1e-6 && secs < 1.0,
          fmt("kappa=%.12f alpha=%.3g time=%.3fs", k.value, k.alpha, secs)};
}

// 2. Negative curvature on cycles.
Outcome counterexample() {
  bool ok = true;
  std::string detail;
  const EntropyPair r2 = EntropyPair::renyi(2.0);
  const WeightFunction theta = WeightFunction::power(2.0);
  for (int n : {6, 8, 10}) {
    const auto t0 = std::chrono::steady_clock::now();
    const CounterexampleRow row = circle_counterexample(n, 1.0, 1e-4);
    KappaOptions opts;
    opts.seed = 20240601;
    opts.seeded = true;
    opts.starts = 16;
    const KappaEstimate est = kappa_estimate(cycle_chain(n, 1.0), r2, theta, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool good = std::abs(row.a - 1.0) <= 1e-3 && std::abs(row.b + n / 2.0) <= 1e-3 * n &&
                      est.upper <= -n / 2.0 + 0.05 && secs < 60.0;
    ok = ok && good;
    detail += fmt("N=%d A=%.6f B=%.6f kappa<=%.6f (%.1fs)%s ", n, row.a, row.b, est.upper, secs,
                  good ? "" : " [x]");
  }
  return {ok, detail};
}

// 3. theta = 1 gives the H^-1 norm.
Outcome hminus1_equivalence() {
  std::mt19937_64 rng(3);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const MarkovChain chain = random_chain(rng, n);
    const Density a = random_density(rng, chain, 0.05);
    const Density b = random_density(rng, chain, 0.05);
    const double h = hminus1_norm(chain, a.values() - b.values());
    const double w = distance(chain, WeightFunction::constant(), a, b).value;
    worst = std::max(worst, std::abs(w - h) / (1.0 + h));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-5 && secs < 300.0, fmt("max |W-H|/(1+H)=%.3e time=%.1fs", worst, secs)};
}

// 4. W_m is non-increasing in m.
Outcome monotone_in_m() {
  std::mt19937_64 rng(4);
  double worst = -kInfinity;
  for (int i = 0; i < 10; ++i) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const MarkovChain chain = random_chain(rng, n);
    const Density a = random_density(rng, chain, 0.05);
    const Density b = random_density(rng, chain, 0.05);
    const double w05 = distance(chain, WeightFunction::power(0.5), a, b).value;
    const double w1 = distance(chain, WeightFunction::power(1.0), a, b).value;
    const double w2 = distance(chain, WeightFunction::power(2.0), a, b).value;
    worst = std::max({worst, w1 - w05, w2 - w1});
  }
  return {worst <= 2e-6, fmt("max(W_m' - W_m)=%.3e", worst)};
}

// 5. The flow is the gradient flow: EVI and energy identity.
Outcome gradient_flow() {
  bool ok = true;
  std::string detail;
  const EntropyPair r2 = EntropyPair::renyi(2.0);
  const WeightFunction theta = WeightFunction::power(2.0);
  struct Case {
    const char* name;
    MarkovChain chain;
    Eigen::VectorXd rho0;
    Eigen::VectorXd sigma;
  };
  std::vector<Case> cases;
  cases.push_back({"two-point", two_point_chain(1.0, 1.0), vec({1.6, 0.4}), vec({0.7, 1.3})});
  cases.push_back({"cycle6", cycle_chain(6, 1.0), vec({2.5, 1.5, 0.8, 0.4, 0.3, 0.5}),
                   vec({0.6, 0.9, 1.2, 1.4, 1.1, 0.8})});
  for (const Case& c : cases) {
    double kappa;
    if (c.chain.size() == 2) {
      kappa = std::min(0.0, two_point_kappa(1.0, 1.0, r2, theta).value);
    } else {
      KappaOptions ko;
      ko.seed = 5;
      ko.seeded = true;
      ko.starts = 16;
      kappa = std::min(0.0, kappa_estimate(c.chain, r2, theta, ko).upper);
    }
    const Density rho0 = Density::normalized(c.chain, c.rho0);
    const Density sigma = Density::normalized(c.chain, c.sigma);

    PmeOptions po;
    po.rtol = 1e-11;
    po.atol = 1e-13;
    po.n_out = 21;
    const Trajectory coarse = solve_pme(c.chain, r2, rho0, 1.0, po);
    DistanceOptions dopts;
    dopts.steps = 64;
    const auto evi = evi_residual(c.chain, r2, MetricHandle::transport(theta, dopts), coarse, sigma, kappa);
    double evi_max = -kInfinity;
    for (const EviSample& s : evi) evi_max = std::max(evi_max, s.residual);

    po.n_out = 801;
    const Trajectory fine = solve_pme(c.chain, r2, rho0, 1.0, po);
    const double h = fine.times[1] - fine.times[0];
    const auto& e = fine.entropy;
    double energy = 0.0;
    for (std::size_t i = 2; i + 2 < fine.size(); ++i) {
      const double dfdt = (e[i - 2] - 8.0 * e[i - 1] + 8.0 * e[i + 1] - e[i + 2]) / (12.0 * h);
      energy = std::max(energy, std::abs(dfdt + fine.dissipation[i]) / fine.dissipation[i]);
    }
    const bool good = evi_max <= 1e-4 && energy <= 1e-4;
    ok = ok && good;
    detail += fmt("%s: kappa=%.4f max EVI residual=%.3e max |dF/dt+I|/I=%.3e%s ", c.name, kappa, evi_max,
                  energy, good ? "" : " [x]");
  }
  return {ok, detail};
}

// 6. B equals the second derivative of F along geodesics.
Outcome hessian_identity() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (const EntropyPair& pair : {EntropyPair::heat(), EntropyPair::renyi(2.0)}) {
    const WeightFunction theta = matched_weight(pair);
    for (int i = 0; i < 20; ++i) {
      const int n = 2 + static_cast<int>(rng() % 5);
      const MarkovChain chain = random_chain(rng, n);
      const Density rho = random_density(rng, chain, 0.3);
      const VertexFunction psi = random_vector(rng, n, 0.5);
      const double b = hessian_form(chain, pair, theta, rho, psi);
      const double d2 = entropy_second_derivative(chain, pair, theta, rho, psi);
      worst = std::max(worst, std::abs(b - d2) / (1.0 + std::abs(b)));
    }
  }
  return {worst <= 1e-4, fmt("max |B - F''|/(1+|B|)=%.3e", worst)};
}

// 7. Power-mean axioms.
Outcome weight_properties() {
  bool ok = true;
  std::string detail;
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(1e-3 * std::pow(1e6, i / 24.0));
  const double ms[] = {0.25, 0.5, 1.0, 1.5, 2.0};
  double homog = 0.0, mono = 0.0, boundary = 0.0, hess = -kInfinity, integral = 0.0;
  for (double m : ms) {
    const WeightFunction theta = WeightFunction::power(m);
    for (double r : grid) {
      for (double s : grid) {
        const double v = theta(r, s);
        for (double l : {1e-2, 0.5, 7.0, 1e2}) homog = std::max(homog, std::abs(theta(l * r, l * s) - l * v) / (l * v));
        if (m <= 1.0) boundary = std::max({boundary, std::abs(theta(0.0, s)), std::abs(theta(r, 0.0))});
        if (r <= 10 * s && s <= 10 * r) {
          integral = std::max(integral, std::abs(theta_power_integral(m, r, s, 64) - v) / v);
        }
      }
    }
    hess = std::max(hess, check_weight_properties(theta).max_hessian_eigenvalue);
  }
  for (int i = 0; i + 1 < 5; ++i) {
    const WeightFunction a = WeightFunction::power(ms[i]);
    const WeightFunction b = WeightFunction::power(ms[i + 1]);
    for (double r : grid) {
      for (double s : grid) mono = std::max(mono, (a(r, s) - b(r, s)) / b(r, s));
    }
  }
  ok = homog <= 1e-12 && mono <= 1e-14 && boundary == 0.0 && hess <= 1e-8 && integral <= 1e-10;
  detail = fmt("homogeneity=%.2e monotone=%.2e boundary=%.1e hessian=%.2e integral=%.2e", homog, mono,
               boundary, hess, integral);
  return {ok, detail};
}

// 8. Torus distances approach W2.
Outcome gh_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const CircleDensity bump({0.5, 0.2}, {});
  const CircleDensity moved = bump.translated(0.25);
  bool ok = true;
  std::string detail;
  for (double m : {1.0, 2.0}) {
    const auto rows = gh_table(m, {8, 16, 32}, bump, moved);
    const bool good = gaps_nonincreasing(rows, 0.1);
    ok = ok && good;
    detail += fmt("m=%g W2=%.6f gaps=%.3e,%.3e,%.3e%s ", m, rows[0].w2, rows[0].gap, rows[1].gap,
                  rows[2].gap, good ? "" : " [x]");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail += fmt("time=%.1fs", secs);
  return {ok && secs < 600.0, detail};
}

// 9. Exponential contraction on the two-point chain.
Outcome contraction() {
  const MarkovChain chain = two_point_chain(1.0, 1.0);
  const Density rho = Density::normalized(chain, vec({1.8, 0.2}));
  const Density sigma = Density::normalized(chain, vec({0.3, 1.7}));
  DistanceOptions dopts;
  dopts.steps = 256;
  const auto rows = contraction_check(chain, EntropyPair::heat(), WeightFunction::logarithmic(), rho, sigma,
                                      2.0, {0.1, 0.5, 1.0}, dopts);
  double worst = -kInfinity;
  std::string detail;
  for (const ContractionRow& r : rows) {
    worst = std::max(worst, r.residual);
    detail += fmt("t=%g W=%.6e bound=%.6e ", r.t, r.distance, r.bound);
  }
  return {worst <= 1e-4, detail + fmt("max residual=%.3e", worst)};
}

// 10. Functional inequalities at kappa = lambda = 2.
Outcome fwi_edi() {
  const MarkovChain chain = two_point_chain(1.0, 1.0);
  const EntropyPair heat = EntropyPair::heat();
  DistanceOptions dopts;
  dopts.steps = 256;
  double fwi = -kInfinity, edi = -kInfinity;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.05 + 1.9 * i / 19.0;
    const Density rho = Density::normalized(chain, vec({a, 2.0 - a}));
    fwi = std::max(fwi, check_fwi(chain, heat, WeightFunction::logarithmic(), rho, 2.0, dopts).residual);
    edi = std::max(edi, check_edi(chain, heat, rho, 2.0));
  }
  return {fwi <= 1e-5 && edi <= 1e-5, fmt("max FWI residual=%.3e max EDI residual=%.3e", fwi, edi)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"two-point closed form", two_point_closed_form},
      {"cycle counterexample", counterexample},
      {"H^-1 equivalence", hminus1_equivalence},
      {"monotonicity in m", monotone_in_m},
      {"gradient-flow consistency", gradient_flow},
      {"Hessian identity", hessian_identity},
      {"weight-function properties", weight_properties},
      {"Gromov-Hausdorff trend", gh_trend},
      {"contraction", contraction},
      {"FWI/EDI", fwi_edi},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu (%s): %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
