#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "dpme/weights.hpp"
#include "support.hpp"

using namespace dpme;
using dpme::testing::random_chain;
using dpme::testing::vec;

TEST_SUITE("markov_core") {

TEST_CASE("two-point stationary law is (q, p)/(p + q)") {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 2, -2;
  const MarkovChain chain = MarkovChain::build(q);
  CHECK(chain.pi()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(chain.pi()(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  REQUIRE(chain.edges().size() == 1);
  CHECK(chain.edges()[0].w == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("symmetric 3-cycle has uniform stationary law") {
  Eigen::MatrixXd q(3, 3);
  q << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  const MarkovChain chain = MarkovChain::build(q);
  for (int x = 0; x < 3; ++x) CHECK(chain.pi()(x) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("invalid rate matrices are rejected with the matching code") {
  auto code_of = [](const Eigen::MatrixXd& q) {
    try {
      MarkovChain::build(q);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ConfigError;
  };
  Eigen::MatrixXd q(2, 2);
  q << -1, 1.5, 1, -1;
  CHECK(code_of(q) == ErrorCode::NotAQMatrix);
  q << 1, -1, 1, -1;
  CHECK(code_of(q) == ErrorCode::NotAQMatrix);
  Eigen::MatrixXd r(3, 3);
  r << -1, 1, 0, 1, -1, 0, 0, 0, 0;
  CHECK(code_of(r) == ErrorCode::NotIrreducible);
  r << -1, 1, 0, 0, -1, 1, 1, 0, -1;  // one-way rotation
  CHECK(code_of(r) == ErrorCode::NotReversible);
  CHECK(code_of(Eigen::MatrixXd::Zero(1, 1)) == ErrorCode::NotAQMatrix);
}

TEST_CASE("supplied pi is cross-checked") {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 2, -2;
  CHECK_NOTHROW(MarkovChain::build(q, vec({2.0 / 3.0, 1.0 / 3.0})));
  CHECK_THROWS_AS(MarkovChain::build(q, vec({0.5, 0.5})), Error);
}

TEST_CASE("density validation") {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 1, -1;
  const MarkovChain chain = MarkovChain::build(q);
  CHECK_NOTHROW(Density::make(chain, vec({1.5, 0.5})));
  CHECK_THROWS_AS(Density::make(chain, vec({1.5, 0.6})), Error);
  CHECK_THROWS_AS(Density::make(chain, vec({2.5, -0.5})), Error);
  CHECK_THROWS_AS(Density::make(chain, vec({1.0, 1.0, 1.0})), Error);
  CHECK(Density::normalized(chain, vec({3.0, 1.0}))[0] == doctest::Approx(1.5));
  CHECK(Density::uniform(chain).interior());
  CHECK_FALSE(Density::make(chain, vec({2.0, 0.0})).interior());
}

TEST_CASE("laplacian examples") {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 1, -1;
  const MarkovChain chain = MarkovChain::build(q);
  const VertexFunction l = laplacian(chain, vec({0.0, 1.0}));
  CHECK(l(0) == doctest::Approx(1.0));
  CHECK(l(1) == doctest::Approx(-1.0));
  CHECK(laplacian(chain, vec({3.0, 3.0})).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(laplacian(chain, vec({1.0, 2.0, 3.0})), Error);
}

TEST_CASE("gradient of a constant vanishes and symmetric fields are divergence free") {
  std::mt19937_64 rng(11);
  const MarkovChain chain = random_chain(rng, 5);
  CHECK(gradient(VertexFunction::Constant(5, 2.0)).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 5);
  const EdgeFunction sym = a + a.transpose();
  CHECK(divergence(chain, sym).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("integration by parts, self-adjointness and div grad = laplacian on random chains") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 11;
    const MarkovChain chain = random_chain(rng, n);
    const VertexFunction psi = testing::random_vector(rng, n);
    const VertexFunction phi = testing::random_vector(rng, n);
    const EdgeFunction field = Eigen::MatrixXd::Random(n, n);
    const double lhs = inner_pi(chain, gradient(psi), field);
    const double rhs = -inner_pi(chain, psi, divergence(chain, field));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    const double s1 = inner_pi(chain, laplacian(chain, phi), psi);
    const double s2 = inner_pi(chain, phi, laplacian(chain, psi));
    CHECK(std::abs(s1 - s2) <= 1e-12 * (1.0 + std::abs(s1)));
    CHECK((divergence(chain, gradient(psi)) - laplacian(chain, psi)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(pi_mean(chain, laplacian(chain, psi))) < 1e-12);
  }
}

TEST_CASE("generator spectrum is nonpositive with a simple zero eigenvalue") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial;
    const MarkovChain chain = random_chain(rng, n);
    const Eigen::VectorXd s = chain.pi().cwiseSqrt();
    const Eigen::MatrixXd sym = s.asDiagonal() * chain.rates() * s.cwiseInverse().asDiagonal();
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (sym + sym.transpose())).eigenvalues();
    CHECK(ev(n - 1) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(ev(n - 2) < -1e-8);
  }
}

TEST_CASE("rho-weighted inner product") {
  Eigen::MatrixXd q(2, 2);
  const double p = 1.0, r = 2.0;
  q << -p, p, r, -r;
  const MarkovChain chain = MarkovChain::build(q);
  const WeightFunction theta = WeightFunction::logarithmic();
  const Density rho = Density::make(chain, vec({1.2, 0.6}));
  const VertexFunction psi = vec({0.3, -1.1});
  const EdgeFunction g = gradient(psi);
  const double expected = p * r / (p + r) * theta(1.2, 0.6) * 1.4 * 1.4;
  CHECK(inner_rho(chain, theta, rho, g, g) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(inner_rho(chain, theta, rho, gradient(vec({2.0, 2.0})), gradient(vec({2.0, 2.0}))) == 0.0);

  std::mt19937_64 rng(14);
  const MarkovChain c5 = random_chain(rng, 5);
  const EdgeFunction a = Eigen::MatrixXd::Random(5, 5);
  const EdgeFunction b = Eigen::MatrixXd::Random(5, 5);
  CHECK(inner_rho(c5, theta, Density::uniform(c5), a, b) ==
        doctest::Approx(inner_pi(c5, a, b)).epsilon(1e-13));
}

}
