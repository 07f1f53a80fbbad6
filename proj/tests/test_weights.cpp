#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dpme/entropy.hpp"
#include "dpme/weights.hpp"

using namespace dpme;

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return g;
}

const double kExponents[] = {0.25, 0.5, 1.0, 1.5, 2.0};

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("closed-form values of the power means") {
  CHECK(WeightFunction::power(2.0)(1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(WeightFunction::power(0.5)(1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(WeightFunction::logarithmic()(1.0, std::numbers::e) ==
        doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
  CHECK(WeightFunction::harmonic()(1.0, 4.0) == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(WeightFunction::constant()(0.0, 5.0) == 1.0);
  for (double m : kExponents) {
    CHECK(WeightFunction::power(m)(0.7, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  }
}

TEST_CASE("direct quotient agrees with the sinhc evaluation") {
  for (double m : {0.25, 0.5, 1.5, 1.9}) {
    const WeightFunction theta = WeightFunction::power(m);
    for (auto [r, s] : {std::pair{1.0, 3.0}, {0.2, 7.0}, {5.0, 0.01}, {2.0, 2.5}}) {
      const double direct =
          (m - 1.0) / m * (std::pow(r, m) - std::pow(s, m)) / (std::pow(r, m - 1.0) - std::pow(s, m - 1.0));
      CHECK(theta(r, s) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  CHECK(WeightFunction::logarithmic()(2.0, 5.0) ==
        doctest::Approx(3.0 / std::log(2.5)).epsilon(1e-14));
}

TEST_CASE("boundary values") {
  for (double m : {0.25, 0.5, 1.0}) CHECK(WeightFunction::power(m)(0.0, 2.0) == 0.0);
  CHECK(WeightFunction::power(1.5)(0.0, 3.0) == doctest::Approx(1.0));
  CHECK(WeightFunction::power(2.0)(0.0, 3.0) == doctest::Approx(1.5));
  CHECK(WeightFunction::power(0.5)(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(WeightFunction::logarithmic().jet(0.0, 1.0), Error);
}

TEST_CASE("exponent range") {
  CHECK_THROWS_AS(WeightFunction::power(2.5), Error);
  CHECK_THROWS_AS(WeightFunction::power(0.0), Error);
  CHECK_THROWS_AS(WeightFunction::power(-1.0), Error);
  CHECK(WeightFunction::power(1.0).kind() == WeightFunction::Kind::Logarithmic);
  try {
    WeightFunction::power(3.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExponentOutOfRange);
  }
}

TEST_CASE("integral representation") {
  CHECK(theta_power_integral(2.0, 1.0, 3.0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(theta_power_integral(0.5, 1.0, 4.0, 64) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(theta_power_integral(1.5, 0.8, 0.8, 4) == doctest::Approx(0.8).epsilon(1e-14));
  for (double m : kExponents) {
    const WeightFunction theta = WeightFunction::power(m);
    for (double r : log_grid(0.1, 10.0, 9)) {
      for (double s : log_grid(0.1, 10.0, 9)) {
        if (r / s > 10.0 || s / r > 10.0) continue;
        CHECK(std::abs(theta_power_integral(m, r, s, 64) - theta(r, s)) <= 1e-10 * theta(r, s));
      }
    }
  }
  CHECK(theta_power_integral(1.0, 1.0, 2.0, 64) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(theta_power_integral(2.5, 1.0, 2.0, 64), Error);
  CHECK_THROWS_AS(theta_power_integral(0.5, 1.0, 2.0, 1), Error);
}

TEST_CASE("quotient weights from entropy pairs") {
  const WeightFunction heat = WeightFunction::from_pair(EntropyPair::heat());
  CHECK(heat(1.0, std::numbers::e) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
  CHECK(heat(0.0, 2.0) == 0.0);
  const WeightFunction r2 = WeightFunction::from_pair(EntropyPair::renyi(2.0));
  CHECK(r2(2.0, 4.0) == doctest::Approx(3.0).epsilon(1e-14));
  for (double m : {0.5, 1.5}) {
    const WeightFunction q = WeightFunction::from_pair(EntropyPair::renyi(m));
    const WeightFunction c = WeightFunction::power(m);
    for (auto [r, s] : {std::pair{0.3, 2.0}, {1.0, 1.1}, {4.0, 0.5}}) {
      CHECK(q(r, s) == doctest::Approx(c(r, s)).epsilon(1e-11));
    }
  }
  // Diagonal against off-diagonal values approaching it.
  for (const WeightFunction& w : {heat, WeightFunction::from_pair(EntropyPair::renyi(0.5))}) {
    for (double r : {0.01, 1.0, 50.0}) {
      const double diag = w(r, r);
      for (double d : {1e-4, 1e-5, 1e-6, 1e-7}) {
        CHECK(std::abs(w(r, r * (1.0 + d)) - diag) / diag < 1e-8 + 2.0 * d);
      }
      CHECK(std::abs(0.5 * (w(r, r * (1 + 1e-4)) + w(r, r * (1 - 1e-4))) - diag) / diag < 1e-8);
    }
  }
}

TEST_CASE("non-convex f is rejected") {
  EntropyPair::Functions bad;
  bad.phi = [](double r) { return r; };
  bad.dphi = [](double) { return 1.0; };
  bad.f = [](double r) { return -r * r; };
  bad.df = [](double r) { return -2.0 * r; };
  bad.d2f = [](double) { return -2.0; };
  try {
    EntropyPair::custom("bad", bad);
    FAIL("expected NonConvexF");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvexF);
  }
}

TEST_CASE("weight axioms on a log grid") {
  std::vector<WeightFunction> shipped = {WeightFunction::constant(),
                                         WeightFunction::from_pair(EntropyPair::heat()),
                                         WeightFunction::from_pair(EntropyPair::renyi(1.5))};
  for (double m : kExponents) shipped.push_back(WeightFunction::power(m));
  for (const WeightFunction& theta : shipped) {
    CAPTURE(theta.name());
    const WeightPropertyReport rep = check_weight_properties(theta);
    CHECK(rep.symmetry_gap <= 1e-12 * 1e3);
    CHECK(rep.min_interior_value > 0.0);
    CHECK(rep.monotonicity_violation <= 1e-12);
    // quotient weights take second derivatives by differences; entries reach 1e3 at r = 1e-3
    const bool differenced = theta.kind() == WeightFunction::Kind::PairQuotient;
    CHECK(rep.max_hessian_eigenvalue <= (differenced ? 1e-6 : 1e-8));
    CHECK(rep.doubling_violation <= 1e-9);
    CHECK(rep.derivative_mismatch <= 1e-6);
    CHECK(std::isfinite(rep.c_theta));
    CHECK(rep.c_theta > 0.0);
  }
}

TEST_CASE("homogeneity and monotonicity in m") {
  const auto grid = log_grid(1e-3, 1e3, 25);
  for (double m : kExponents) {
    const WeightFunction theta = WeightFunction::power(m);
    for (double r : grid) {
      for (double s : grid) {
        for (double lambda : {0.1, 3.0, 1e2}) {
          const double v = theta(r, s);
          CHECK(std::abs(theta(lambda * r, lambda * s) - lambda * v) <= 1e-12 * lambda * v);
        }
      }
    }
  }
  for (std::size_t i = 0; i + 1 < std::size(kExponents); ++i) {
    const WeightFunction a = WeightFunction::power(kExponents[i]);
    const WeightFunction b = WeightFunction::power(kExponents[i + 1]);
    for (double r : grid) {
      for (double s : grid) CHECK(a(r, s) <= b(r, s) * (1.0 + 1e-14));
    }
  }
  const WeightFunction h = WeightFunction::harmonic();
  const WeightFunction lo = WeightFunction::power(0.25);
  for (double r : grid) {
    for (double s : grid) CHECK(h(r, s) <= lo(r, s) * (1.0 + 1e-14));
  }
}

TEST_CASE("second derivatives match finite differences of the first") {
  for (double m : {0.25, 0.5, 1.0, 1.5, -1.0}) {
    const WeightFunction theta = m == -1.0 ? WeightFunction::harmonic() : WeightFunction::power(m);
    for (auto [r, s] : {std::pair{1.0, 1.0}, {0.3, 2.0}, {5.0, 0.02}, {1.0, 1.0 + 1e-9}}) {
      const WeightJet j = theta.jet(r, s);
      const double h = 1e-5;
      const double d11 = (theta.d1(r * (1 + h), s) - theta.d1(r * (1 - h), s)) / (2 * h * r);
      const double d12 = (theta.d1(r, s * (1 + h)) - theta.d1(r, s * (1 - h))) / (2 * h * s);
      const double d22 = (theta.d2(r, s * (1 + h)) - theta.d2(r, s * (1 - h))) / (2 * h * s);
      const double scale = theta(r, s) / std::min(r, s) / std::min(r, s);
      CHECK(std::abs(j.d11 - d11) <= 1e-6 * scale);
      CHECK(std::abs(j.d12 - d12) <= 1e-6 * scale);
      CHECK(std::abs(j.d22 - d22) <= 1e-6 * scale);
    }
  }
}

}
