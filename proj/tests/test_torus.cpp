#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "dpme/torus.hpp"

using namespace dpme;

TEST_SUITE("torus") {

TEST_CASE("rate matrices") {
  const TorusChain t2 = build_torus(2, 1);
  CHECK(t2.chain.rate(0, 1) == 8.0);
  CHECK(t2.chain.rate(0, 0) == -8.0);
  const TorusChain t4 = build_torus(4, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-t4.chain.rates());
  CHECK(es.eigenvalues()(1) == doctest::Approx(32.0).epsilon(1e-12));
  const TorusChain sq = build_torus(3, 2);
  CHECK(sq.chain.size() == 9);
  CHECK(sq.chain.rate(0, 0) == -36.0);
  CHECK(sq.chain.rate(0, 3) == 9.0);
  CHECK((sq.chain.pi().array() - 1.0 / 9.0).abs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(build_torus(1, 1), Error);
  CHECK_THROWS_AS(build_torus(4, 3), Error);
}

TEST_CASE("circle densities") {
  const CircleDensity c({0.5}, {});
  CHECK(c(0.0) == doctest::Approx(1.5));
  CHECK(c.cdf(1.0) == doctest::Approx(1.0));
  CHECK(c.cdf(1.3) == doctest::Approx(1.0 + c.cdf(0.3)));
  for (double u : {0.0, 0.1, 0.5, 0.93, 1.4, -0.2}) CHECK(c.cdf(c.quantile(u)) == doctest::Approx(u).epsilon(1e-13));
  CHECK(c.min_value() == doctest::Approx(0.5).epsilon(1e-6));
  const CircleDensity moved = c.translated(0.2);
  for (double x : {0.0, 0.3, 0.77}) CHECK(moved(x) == doctest::Approx(c(x - 0.2)).epsilon(1e-13));
  try {
    CircleDensity({1.2}, {});
    FAIL("expected NonPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositive);
  }
}

TEST_CASE("discretization") {
  const TorusChain t4 = build_torus(4, 1);
  const Density u = discretize(CircleDensity::uniform(), t4);
  CHECK((u.values().array() - 1.0).abs().maxCoeff() < 1e-14);
  const Density d = discretize(CircleDensity({0.5}, {}), t4);
  const double s = 1.0 / std::numbers::pi;
  CHECK(d[0] == doctest::Approx(1.0 + s));
  CHECK(d[1] == doctest::Approx(1.0 - s));
  CHECK(d[2] == doctest::Approx(1.0 - s));
  CHECK(d[3] == doctest::Approx(1.0 + s));
  CHECK(d.values().dot(t4.chain.pi()) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("circle W2") {
  const CircleDensity c({0.5, 0.2}, {0.1});
  CHECK(w2_circle(c, c) <= 1e-8);
  const CircleDensity d({0.1}, {0.3});
  CHECK(std::abs(w2_circle(c, d) - w2_circle(d, c)) <= 1e-10);
  // a narrow bump: 1 + sum of a few harmonics of a smooth peak
  std::vector<double> a;
  for (int k = 1; k <= 24; ++k) a.push_back(0.99 * 2.0 * std::exp(-0.5 * std::pow(2.0 * std::numbers::pi * k * 0.03, 2)));
  double lo = kInfinity;
  for (int i = 0; i < 1000; ++i) {
    double v = 1.0;
    for (int k = 0; k < 24; ++k) v += a[k] * std::cos(2.0 * std::numbers::pi * (k + 1) * i / 1000.0);
    lo = std::min(lo, v);
  }
  REQUIRE(lo > 0.0);
  const CircleDensity bump(a, {});
  for (double t : {0.1, 0.2, 0.25}) {
    CHECK(w2_circle(bump, bump.translated(t)) == doctest::Approx(t).epsilon(2e-3));
  }
  // translation of a flat-ish density costs less than t
  CHECK(w2_circle(CircleDensity({0.3}, {}), CircleDensity({0.3}, {}).translated(0.25)) < 0.25);
}

TEST_CASE("discrete distances respect rotations") {
  const TorusChain t8 = build_torus(8, 1);
  const Density a = discretize(CircleDensity({0.5}, {}), t8);
  const Density b = discretize(CircleDensity({0.5}, {}).translated(0.25), t8);
  Eigen::VectorXd ra(8), rb(8);
  for (int i = 0; i < 8; ++i) {
    ra((i + 1) % 8) = a[i];
    rb((i + 1) % 8) = b[i];
  }
  const WeightFunction theta = WeightFunction::logarithmic();
  const double w = distance(t8.chain, theta, a, b).value;
  const double wr = distance(t8.chain, theta, Density::make(t8.chain, ra), Density::make(t8.chain, rb)).value;
  CHECK(std::abs(w - wr) <= 1e-6 * w);
  CHECK(distance(t8.chain, WeightFunction::power(2.0), a, b).value <= w + 1e-6);
}

TEST_CASE("GH table") {
  const CircleDensity c({0.5}, {});
  const auto same = gh_table(1.0, {8}, c, c);
  CHECK(same[0].w_n == 0.0);
  CHECK(same[0].w2 <= 1e-8);
  const auto rows = gh_table(2.0, {8, 16}, c, c.translated(0.2));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].gap < rows[0].gap);
  CHECK(gaps_nonincreasing(rows));
  CHECK_FALSE(gaps_nonincreasing({{8, 0, 0, 1.0}, {16, 0, 0, 1.2}}));
  CHECK(gaps_nonincreasing({{8, 0, 0, 1.0}, {16, 0, 0, 1.05}}));
}

TEST_CASE("three properties of theta") {
  for (double m : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const ThetaGhReport rep = theta_gh_properties(m);
    CHECK(rep.diagonal_error <= 1e-12 * 1e3);
    CHECK(rep.max_hessian_eigenvalue <= 1e-8);
    CHECK(rep.property3_violation <= 1e-12);
  }
  CHECK(WeightFunction::power(1.5)(0.3, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  const double th = WeightFunction::harmonic()(1.0, 4.0);
  const double t2 = WeightFunction::power(2.0)(1.0, 4.0);
  CHECK(1.0 / th - 1.0 / t2 == doctest::Approx(9.0 / 40.0));
  CHECK(9.0 / 4.0 / th == doctest::Approx(45.0 / 32.0));
}

}
