#include "doctest.h"

#include "expert_lab/rng.hpp"
#include "expert_lab/value3.hpp"

#include <cmath>

using namespace expertlab;

namespace {
Vector3d v3(double a, double b, double c) {
  Vector3d v;
  v << a, b, c;
  return v;
}
}  // namespace

TEST_CASE("value3 pinned constants, terminal, translation") {
  CHECK(value3({0, 1, v3(0, 0, 0)}) ==
        doctest::Approx(4.0 / (3.0 * std::sqrt(2.0 * kPi))).epsilon(1e-14));
  CHECK(value3({1, 1, v3(0, 1, 3)}) == 3.0);
  // near-terminal limit
  CHECK(value3({1 - 1e-8, 1, v3(0, 1, 3)}) == doctest::Approx(3.0).epsilon(1e-7));

  const double base = value3({0.2, 1, v3(0, 1, 3)});
  CHECK(value3({0.2, 1, v3(0.4, 1.4, 3.4)}) == doctest::Approx(base + 0.4).epsilon(1e-13));
  CHECK(value3({0.2, 1, v3(3, 0, 1)}) == doctest::Approx(base).epsilon(1e-14));

  // scaling identity
  const double lam = 1.7;
  CHECK(value3({lam * lam * 0.2, lam * lam, Vector3d(lam * v3(0, 1, 3))}) ==
        doctest::Approx(lam * base).epsilon(1e-13));

  CHECK_THROWS_AS(value3({0.5, 0.4, v3(0, 0, 0)}), std::domain_error);
}

TEST_CASE("geometric_value3 pinned constants") {
  const double u0 = 4.0 / (6.0 * kSqrt2);
  CHECK(geometric_value3(v3(0, 0, 0)) == doctest::Approx(u0).epsilon(1e-15));
  CHECK(geometric_value3(v3(0.9, 0.9, 0.9)) == doctest::Approx(0.9 + u0).epsilon(1e-14));
  // leader dominance: tiny exponential corrections only
  CHECK(geometric_value3(v3(0, 0, 10)) == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(geometric_value3(v3(0, 0, 10)) > 10.0);
  CHECK(geometric_value3(v3(2, 0, 1)) == doctest::Approx(geometric_value3(v3(0, 1, 2))).epsilon(1e-15));
}

TEST_CASE("gradient3 sums to one and matches finite differences") {
  const Vector3d g0 = gradient3({0, 1, v3(0, 0, 0)});
  for (int i = 0; i < 3; ++i) CHECK(g0[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(gradient3({1, 1, v3(0, 1, 2)}), std::domain_error);

  CounterRng rng(606, 0);
  for (int rep = 0; rep < 40; ++rep) {
    Vector3d x;
    for (int i = 0; i < 3; ++i) x[i] = 4.0 * rng.next_double() - 2.0;
    const double t = 0.9 * rng.next_double();
    const EvalPoint3 p{t, 1, x};
    const Vector3d g = gradient3(p);
    CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g.minCoeff() >= -1e-12);

    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      EvalPoint3 up = p, dn = p;
      up.x[i] += h;
      dn.x[i] -= h;
      CHECK(g[i] == doctest::Approx((value3(up) - value3(dn)) / (2 * h)).epsilon(2e-5));
    }
  }
}

TEST_CASE("gradient3 equal across tied coordinates") {
  const Vector3d g = gradient3({0, 1, v3(0.5, 0.5, 1.2)});
  CHECK(g[0] == doctest::Approx(g[1]).epsilon(1e-15));
  const Vector3d g2 = gradient3({0, 1, v3(0.1, 0.9, 0.9)});
  CHECK(g2[1] == doctest::Approx(g2[2]).epsilon(1e-15));
}

TEST_CASE("value3 satisfies the comb-direction heat equation numerically") {
  // dt u + 0.5 (d_{i1} + d_{i3})^2 u = 0 along the 3-expert comb
  // {laggard, leader}, finite differences
  const Vector3d x = v3(0.0, 0.4, 1.1);
  const double t = 0.3, T = 1.0, h = 1e-4;
  const double dt_u = (value3({t + h, T, x}) - value3({t - h, T, x})) / (2 * h);
  // ranks: i1 = index 0, i3 = index 2 for this state
  Vector3d e = v3(1, 0, 1);
  const double upp = value3({t, T, Vector3d(x + h * e)});
  const double umm = value3({t, T, Vector3d(x - h * e)});
  const double u0 = value3({t, T, x});
  const double dir2 = (upp - 2 * u0 + umm) / (h * h);
  CHECK(dt_u + 0.5 * dir2 == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("geometric_value3 solves its stationary equation by finite differences") {
  // u - 0.5 max_J e_J^T d2u e_J - Phi = 0; the max is attained by the comb
  // pair {worst, leader} = ranks {1,3}
  const Vector3d x = v3(0.0, 0.6, 1.3);
  const double h = 1e-4;
  double best = -1e300;
  for (unsigned mask = 1; mask < 8; ++mask) {
    Vector3d e = Vector3d::Zero();
    for (int i = 0; i < 3; ++i)
      if ((mask >> i) & 1u) e[i] = 1.0;
    const double d2 = (geometric_value3(Vector3d(x + h * e)) - 2 * geometric_value3(x) +
                       geometric_value3(Vector3d(x - h * e))) /
                      (h * h);
    best = std::max(best, d2);
  }
  const double residual = geometric_value3(x) - 0.5 * best - x.maxCoeff();
  CHECK(residual == doctest::Approx(0.0).epsilon(1e-5));
}
