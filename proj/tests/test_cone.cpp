// Cone arithmetic: gauge norms, positivity verdicts, domination constants,
// weighted L^p norms, and their consistency properties on random data.

#include <cmath>
#include <random>

#include "amp/cone.hpp"
#include "doctest.h"

using namespace amp;

namespace {

Vec random_vec(std::mt19937_64& rng, int n, bool positive = false) {
  std::normal_distribution<double> gauss;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = positive ? 0.1 + std::abs(gauss(rng)) : gauss(rng);
  return v;
}

}  // namespace

TEST_CASE("gauge norm basics") {
  Vec f(3), u(3);
  f << 1, -2, 3;
  u << 1, 1, 1;
  CHECK(gauge_norm(f, u) == doctest::Approx(3.0).epsilon(1e-15));
  // f = u for any strictly positive u
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const Vec w = random_vec(rng, 17, true);
    CHECK(gauge_norm(w, w) == doctest::Approx(1.0).epsilon(1e-15));
  }
  Vec bad(3);
  bad << 1, 0, 1;
  CHECK_THROWS_AS(gauge_norm(f, bad), domain_error);
}

TEST_CASE("gauge norm of interior sine grid") {
  // f = sin(pi x) on the interior grid of (0,1) with h = 0.1: the maximum
  // over the 9 interior nodes sits at x = 0.5 with value exactly sin(pi/2).
  const int n = 10;
  Vec f(n - 1), u = Vec::Ones(n - 1);
  for (int i = 1; i < n; ++i) f(i - 1) = std::sin(M_PI * i / n);
  CHECK(gauge_norm(f, u) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gauge norm axioms on random triples") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const Vec f = random_vec(rng, n), g = random_vec(rng, n);
    const Vec u = random_vec(rng, n, true);
    const double a = gauss(rng);
    CHECK(gauge_norm(a * f, u) ==
          doctest::Approx(std::abs(a) * gauge_norm(f, u)).epsilon(1e-12));
    CHECK(gauge_norm(f + g, u) <= gauge_norm(f, u) + gauge_norm(g, u) + 1e-12);
  }
}

TEST_CASE("gauge norm monotone in u") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 20);
    const Vec f = random_vec(rng, n);
    const Vec u = random_vec(rng, n, true);
    const Vec up = u + random_vec(rng, n, true);  // u' >= u entrywise
    CHECK(gauge_norm(f, u) >= gauge_norm(f, up) - 1e-12);
  }
}

TEST_CASE("cone_nonneg verdicts") {
  const ConeTolerance tol{1e-10, 0.0};
  Vec zero = Vec::Zero(3);
  auto v = cone_nonneg(zero, tol, 0.0);
  CHECK(v.holds);
  CHECK(v.margin == 0.0);

  Vec f(3);
  f << 1.0, -1e-14, 2.0;
  CHECK(cone_nonneg(f, tol, 2.0).holds);

  f << 1.0, -0.5, 2.0;
  auto bad = cone_nonneg(f, tol, 2.0);
  CHECK_FALSE(bad.holds);
  CHECK(bad.witness_index == 1);

  CHECK(cone_nonneg(Vec(), tol, 1.0).holds);
  CHECK_THROWS_AS(cone_nonneg(f, ConeTolerance{0.0, 0.0}, 1.0), domain_error);
}

TEST_CASE("cone_dominates basics and witness identity") {
  const ConeTolerance tol{1e-10, 0.0};
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 25);
    const Vec f = random_vec(rng, n);
    const Vec u = random_vec(rng, n, true);
    const auto r = cone_dominates(f, u, tol);
    // f - c*u >= 0 entrywise with equality at the witness
    const Vec slack = f - r.c * u;
    CHECK(slack.minCoeff() >= -1e-13 * f.cwiseAbs().maxCoeff());
    CHECK(std::abs(slack(r.verdict.witness_index)) <= 1e-13 * f.cwiseAbs().maxCoeff());
  }
  Vec u = Vec::Ones(4), f = Vec::Ones(4);
  CHECK(cone_dominates(f, u, tol).c == doctest::Approx(1.0));
  CHECK(cone_dominates(f, u, tol).verdict.holds);
}

TEST_CASE("dirichlet ground state domination constant") {
  // v_i = sin(pi x_i) on the interior grid with 99 nodes, u = 1: the minimum
  // of the ratio sits at the first node, c = sin(pi h) with h = 0.01.
  const int nodes = 99;
  const double h = 1.0 / (nodes + 1);
  Vec v(nodes), u = Vec::Ones(nodes);
  for (int i = 1; i <= nodes; ++i) v(i - 1) = std::sin(M_PI * i * h);
  const auto r = cone_dominates(v, u, ConeTolerance{1e-10, 0.0});
  CHECK(r.c == doctest::Approx(std::sin(M_PI * h)).epsilon(1e-12));
  CHECK(r.c == doctest::Approx(0.031410).epsilon(1e-4));
}

TEST_CASE("gauge norm vs domination consistency") {
  // ||f||_u <= 1 iff u - |f| dominates u with c >= 0.
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 20);
    Vec f = random_vec(rng, n);
    const Vec u = random_vec(rng, n, true);
    if (rep % 2) f = f.cwiseProduct(u) * 0.9;  // force some cases below 1
    const double g = gauge_norm(f, u);
    const auto r = cone_dominates(u - f.cwiseAbs(), u, ConeTolerance{1e-12, 0.0});
    CHECK(r.c == doctest::Approx(1.0 - g).epsilon(1e-10));
    CHECK((g <= 1.0) == (r.c >= -1e-14));
  }
}

TEST_CASE("lp norms with quadrature weights") {
  auto space = cell_grid_1d(10);
  GridFunction one = constant_function(space, 1.0);
  CHECK(lp_norm(one, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lp_norm(one, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));

  GridFunction half = one;
  half.values.tail(5).setZero();
  CHECK(lp_norm(half, 1.0) == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(lp_norm(one, 0.5), domain_error);
}
