#include "doctest.h"
#include "oracles.hpp"

#include "tglm/error.hpp"
#include "tglm/glm.hpp"
#include "tglm/wls.hpp"

#include <random>

using namespace tglm;

namespace {

WlsProblem random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cols(1, 8);
  const int J = cols(rng);
  std::uniform_int_distribution<int> rows(J + 2, 50);
  const int m = rows(rng);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> wd(0.1, 5.0);
  WlsProblem p{Eigen::MatrixXd(m, J), Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < J; ++j) p.X(i, j) = nd(rng);
    p.z(i) = nd(rng) * 3.0;
    p.w(i) = wd(rng);
  }
  return p;
}

}  // namespace

TEST_SUITE("wls") {
  TEST_CASE("unit-weight mean") {
    const auto s = solve_wls({Eigen::MatrixXd::Ones(3, 1), Eigen::Vector3d(1, 2, 3), Eigen::Vector3d::Ones()});
    CHECK(s.rank_ok);
    CHECK(s.beta(0) == doctest::Approx(2.0));
    CHECK(s.V(0, 0) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("weighted mean") {
    const auto s = solve_wls({Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(0, 10), Eigen::Vector2d(9, 1)});
    CHECK(s.beta(0) == doctest::Approx(1.0));
    CHECK(s.V(0, 0) == doctest::Approx(0.1));
  }

  TEST_CASE("zero response") {
    const auto s = solve_wls({Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 4)});
    CHECK(s.beta(0) == 0.0);
    CHECK(s.V(0, 0) == doctest::Approx(0.125));
  }

  TEST_CASE("invalid weights are rejected") {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 1);
    CHECK_THROWS_AS(solve_wls({X, Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 0)}), Error);
    CHECK_THROWS_AS(solve_wls({X, Eigen::Vector2d(1, 2), Eigen::Vector2d(1, -1)}), Error);
    CHECK_THROWS_AS(solve_wls({X, Eigen::Vector2d(1, 2), Eigen::Vector2d(1, kInf)}), Error);
    CHECK_THROWS_AS(solve_wls({X, Eigen::Vector2d(1, 2), Eigen::Vector2d(1, std::nan(""))}), Error);
    CHECK_THROWS_AS(solve_wls({Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), Eigen::VectorXd(0)}), Error);
  }

  TEST_CASE("agreement with an extended-precision normal-equations solve") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 200; ++rep) {
      const auto p = random_problem(rng);
      const auto s = solve_wls(p);
      REQUIRE(s.rank_ok);
      const auto ref = oracle::normal_equations(p.X, p.z, p.w);
      for (Eigen::Index j = 0; j < p.X.cols(); ++j) {
        const double r = static_cast<double>(ref[static_cast<std::size_t>(j)]);
        CHECK(std::abs(s.beta(j) - r) <= 1e-8 * std::max(1.0, std::abs(r)));
      }
    }
  }

  TEST_CASE("solution invariants: symmetric positive definite V, orthogonal residuals") {
    std::mt19937_64 rng(103);
    for (int rep = 0; rep < 100; ++rep) {
      const auto p = random_problem(rng);
      const auto s = solve_wls(p);
      CHECK((s.V - s.V.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(s.V).info() == Eigen::Success);
      const Eigen::VectorXd wr = p.w.cwiseProduct(p.z - p.X * s.beta);
      const Eigen::VectorXd g = p.X.transpose() * wr;
      const double scale = (p.X.cwiseAbs().transpose() * p.w.cwiseProduct(p.z).cwiseAbs()).maxCoeff();
      CHECK(g.cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, scale));
      const Eigen::MatrixXd XtWX = p.X.transpose() * p.w.asDiagonal() * p.X;
      CHECK((XtWX * s.V - Eigen::MatrixXd::Identity(p.X.cols(), p.X.cols())).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("weight scaling leaves beta and divides V") {
    std::mt19937_64 rng(107);
    for (int rep = 0; rep < 50; ++rep) {
      auto p = random_problem(rng);
      const auto s1 = solve_wls(p);
      for (double c : {0.01, 3.0, 1e5}) {
        auto q = p;
        q.w *= c;
        const auto s2 = solve_wls(q);
        CHECK((s1.beta - s2.beta).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, s1.beta.cwiseAbs().maxCoeff()));
        CHECK((s1.V / c - s2.V).cwiseAbs().maxCoeff() < 1e-10 * (s1.V / c).cwiseAbs().maxCoeff());
      }
    }
  }

  TEST_CASE("rank deficiency is flagged with a least-norm solution") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 1, 2, 2, 3, 3, 4, 4;
    const auto s = solve_wls({X, Eigen::Vector4d(1, 2, 3, 4), Eigen::Vector4d::Ones()});
    CHECK_FALSE(s.rank_ok);
    CHECK(s.beta(0) == doctest::Approx(0.5));
    CHECK(s.beta(1) == doctest::Approx(0.5));
  }

  TEST_CASE("prior rows make any design full rank, including duplicate columns") {
    std::mt19937_64 rng(109);
    for (int rep = 0; rep < 30; ++rep) {
      auto p = random_problem(rng);
      Eigen::MatrixXd X(p.X.rows(), p.X.cols() + 2);
      X << p.X, p.X.col(0), p.X.col(0);
      PseudoData pd{p.z, p.w.cwiseInverse()};
      PriorSpec prior(static_cast<std::size_t>(X.cols()), CoefPrior{0.0, 2.5, 1.0});
      const auto aug = augment(pd, X, prior, Eigen::VectorXd::Constant(X.cols(), 2.5));
      CHECK(aug.X.rows() == X.rows() + X.cols());
      const auto s = solve_wls(aug);
      CHECK(s.rank_ok);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(s.V).info() == Eigen::Success);
    }
  }
}
