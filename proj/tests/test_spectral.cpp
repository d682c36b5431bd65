// Leading eigenpair extraction, spectral-assumption verdicts, the rank-one
// spectral projection, and mesh-robust domination scaling.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "amp/harness.hpp"
#include "amp/random_fields.hpp"
#include "amp/resolvent.hpp"
#include "amp/spectral.hpp"
#include "doctest.h"

using namespace amp;

TEST_CASE("rank one leading eigenpair: lambda0=0, v=1, phi=1, gap=1") {
  const auto op = build_rank_one(64);
  const auto rep = leading_eigenpair(op);
  CHECK(std::abs(rep.lambda0) < 1e-12);
  CHECK(rep.gap == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.simple);
  CHECK((rep.v.values.array() - 1.0).abs().maxCoeff() < 1e-10);
  // phi = 1 in the weighted pairing: sum w phi v = 1 with phi constant 1
  CHECK((rep.phi.values.array() - 1.0).abs().maxCoeff() < 1e-8);
  CHECK(rep.c_dom == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("1d neumann: constant eigenvector with c_dom = 1") {
  const auto op = build_laplacian(1, 50, BoundaryCondition::neumann());
  const auto rep = leading_eigenpair(op);
  CHECK(std::abs(rep.lambda0) < 1e-10);
  CHECK((rep.v.values.array() - 1.0).abs().maxCoeff() < 1e-8);
  const auto verdict = check_spectral_assumption(rep, constant_function(op.space, 1.0),
                                                 ConeTolerance{1e-9, 0.0});
  CHECK(verdict.overall);
  CHECK(verdict.c_dom == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("1d dirichlet eigenpair matches sin(pi x) and the FD eigenvalue") {
  const int n = 100;  // 99 interior nodes
  const auto op = build_laplacian(1, n, BoundaryCondition::dirichlet());
  const auto rep = leading_eigenpair(op);
  const double h = 1.0 / n;
  const double s = std::sin(M_PI * h / 2.0);
  CHECK(rep.lambda0 == doctest::Approx(-4.0 / (h * h) * s * s).epsilon(1e-12));
  for (int i = 1; i < n; ++i)
    CHECK(rep.v.values(i - 1) == doctest::Approx(std::sin(M_PI * i * h)).epsilon(1e-8));
  CHECK(rep.c_dom == doctest::Approx(std::sin(M_PI * h)).epsilon(1e-6));
}

TEST_CASE("coupled exchange system satisfies the spectral assumption") {
  Eigen::MatrixXd V(2, 2);
  V << 0, 1, 1, 0;
  const auto op = build_coupled(16, 1, 2, {V});
  const auto verdict = check_spectral_assumption(op, constant_function(op.space, 1.0),
                                                 ConeTolerance{1e-9, 0.0});
  CHECK(verdict.overall);
}

TEST_CASE("transpose has the same spectral bound") {
  for (uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    const auto op = metzler_operator(seed, 18);
    const auto a = leading_eigenpair(op);
    const auto b = leading_eigenpair(transposed(op));
    CHECK(b.lambda0 == doctest::Approx(a.lambda0).epsilon(1e-10));
  }
}

TEST_CASE("spectral projection: idempotent, commutes with A and the resolvent") {
  const auto op = build_rank_one(32);
  const auto rep = leading_eigenpair(op);
  const Eigen::MatrixXd P = spectral_projection(rep);

  // rank_one: P f = (sum w f) 1
  Vec f = Vec::LinSpaced(32, -1.0, 2.0);
  const double mean = op.space->weights.dot(f);
  CHECK(((P * f).array() - mean).abs().maxCoeff() < 1e-10);

  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd A = op.dense();
  CHECK((P * A - A * P).cwiseAbs().maxCoeff() < 1e-8 * rep.scale);
  CHECK((P * A - rep.lambda0 * P).cwiseAbs().maxCoeff() < 1e-8 * rep.scale);

  // P Res(lambda) = Res(lambda) P = P / (lambda - lambda0)
  const double lambda = rep.lambda0 + 0.7;
  Eigen::MatrixXd R(32, 32);
  for (int j = 0; j < 32; ++j) {
    GridFunction e(Vec::Unit(32, j), op.space);
    R.col(j) = apply_resolvent(op, lambda, e).values;
  }
  CHECK((P * R - R * P).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((P * R - P / (lambda - rep.lambda0)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("perron structure for metzler builders") {
  std::mt19937_64 rng(17);
  for (int rep_i = 0; rep_i < 10; ++rep_i) {
    const auto op = metzler_operator(1000 + rep_i, 5 + static_cast<int>(rng() % 20));
    const auto rep = leading_eigenpair(op);
    CHECK(rep.v.values.minCoeff() > 0.0);   // strict positivity (irreducible)
    CHECK(rep.phi.values.minCoeff() > 0.0);
    CHECK(rep.simple);
  }
}

TEST_CASE("gap matches a dense cross-check on small matrices") {
  const auto op = metzler_operator(99, 40);
  const auto rep = leading_eigenpair(op);
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.dense());
  double lead = -1e300, next = -1e300;
  for (int i = 0; i < op.size(); ++i) lead = std::max(lead, es.eigenvalues()(i).real());
  for (int i = 0; i < op.size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re < lead - 1e-8 * rep.scale) next = std::max(next, re);
  }
  CHECK(rep.lambda0 == doctest::Approx(lead).epsilon(1e-10));
  CHECK(rep.gap == doctest::Approx(lead - next).epsilon(1e-8));
}

TEST_CASE("no real spectral bound error for a rotation block") {
  Eigen::MatrixXd M(2, 2);
  M << 0, -1, 1, 0;  // eigenvalues +-i
  const auto op = wrap_dense(M, cell_grid_1d(2));
  CHECK_THROWS_AS(leading_eigenpair(op), numerical_error);
}

TEST_CASE("iterative path agrees with the dense path") {
  const auto op = build_laplacian(2, 16, BoundaryCondition::dirichlet());
  const auto dense_rep = leading_eigenpair(op);
  EigOptions small_cap;
  small_cap.dense_cap = 10;  // force shift-invert iteration
  const auto iter_rep = leading_eigenpair(op, small_cap);
  CHECK(iter_rep.lambda0 == doctest::Approx(dense_rep.lambda0).epsilon(1e-9));
  CHECK(iter_rep.gap == doctest::Approx(dense_rep.gap).epsilon(1e-4));
  CHECK(iter_rep.simple);
  CHECK((iter_rep.v.values - dense_rep.v.values).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("mesh robust domination: neumann flat, dirichlet decays at rate 1") {
  const std::vector<int> ladder{25, 50, 100, 200};

  const auto neumann = mesh_robust_domination(
      [](int n) { return build_laplacian(1, n, BoundaryCondition::neumann()); }, ladder);
  CHECK(std::abs(neumann.alpha) <= 0.05);

  const auto dirichlet = mesh_robust_domination(
      [](int n) { return build_laplacian(1, n, BoundaryCondition::dirichlet()); }, ladder);
  CHECK(dirichlet.alpha == doctest::Approx(1.0).epsilon(0.1));
  // oracle: c_dom(h) = sin(pi h) up to the sup normalization
  for (const auto& rung : dirichlet.rungs)
    CHECK(rung.c_dom == doctest::Approx(std::sin(M_PI * rung.h)).epsilon(1e-3));

  const auto robin = mesh_robust_domination(
      [](int n) { return build_laplacian(1, n, BoundaryCondition::robin(1.0)); }, ladder);
  CHECK(std::abs(robin.alpha) <= 0.1);

  CHECK_THROWS_AS(mesh_robust_domination(
                      [](int n) { return build_rank_one(n); }, std::vector<int>{4, 8}),
                  domain_error);
}
