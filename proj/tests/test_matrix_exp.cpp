#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gainbound/matrix_exp.hpp"
#include "support/test_oracles.hpp"

using gainbound::matrix_exponential;
using testsupport::expm_taylor;
using testsupport::random_matrix;

TEST_CASE("exponential of zero is identity") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 3);
  REQUIRE(matrix_exponential(z).isApprox(Eigen::MatrixXd::Identity(3, 3),
                                         1e-15));
}

TEST_CASE("diagonal matrices exponentiate entrywise") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = -1.5;
  d(1, 1) = 3.25;
  const Eigen::MatrixXd e = matrix_exponential(d);
  CHECK(e(0, 0) == Catch::Approx(std::exp(-1.5)).epsilon(1e-14));
  CHECK(e(1, 1) == Catch::Approx(std::exp(3.25)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-16);
  CHECK(std::abs(e(1, 0)) < 1e-16);
}

TEST_CASE("rotation generator gives cosine/sine block") {
  const double theta = 0.7;
  Eigen::MatrixXd g(2, 2);
  g << 0.0, -theta, theta, 0.0;
  const Eigen::MatrixXd e = matrix_exponential(g);
  CHECK(e(0, 0) == Catch::Approx(std::cos(theta)).margin(1e-15));
  CHECK(e(1, 0) == Catch::Approx(std::sin(theta)).margin(1e-15));
}

TEST_CASE("agrees with scaled Taylor reference across norm scales") {
  std::mt19937_64 rng(2024);
  for (double scale : {0.01, 0.3, 1.0, 4.0, 25.0, 120.0}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Eigen::Index n = 2 + (trial % 3) * 2;
      const Eigen::MatrixXd a = random_matrix(rng, n, n) * scale;
      const Eigen::MatrixXd pade = matrix_exponential(a);
      const Eigen::MatrixXd taylor = expm_taylor(a);
      REQUIRE((pade - taylor).norm() <= 1e-11 * (1.0 + taylor.norm()));
    }
  }
}

TEST_CASE("semigroup property exp(a(s+t)) = exp(as) exp(at)") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = random_matrix(rng, 4, 4) * 2.0;
    const double s = testsupport::uniform(rng, 0.05, 1.0);
    const double t = testsupport::uniform(rng, 0.05, 1.0);
    const Eigen::MatrixXd whole = matrix_exponential(a * (s + t));
    const Eigen::MatrixXd split =
        matrix_exponential(a * s) * matrix_exponential(a * t);
    REQUIRE((whole - split).norm() <= 1e-10 * (1.0 + whole.norm()));
  }
}

TEST_CASE("rejects non-square input") {
  REQUIRE_THROWS_AS(matrix_exponential(Eigen::MatrixXd::Zero(2, 3)),
                    gainbound::ConfigError);
}
