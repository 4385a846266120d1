#include "doctest.h"

#include "expert_lab/discrete_game.hpp"
#include "expert_lab/rng.hpp"

#include <array>
#include <cmath>
#include <map>

using namespace expertlab;

namespace {

// direct evaluation of max_J (c_J - alpha(J)) at a given mixture
double game_payoff(const std::vector<double>& costs, const std::vector<double>& alpha) {
  const int n = static_cast<int>(alpha.size());
  double best = -1e300;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double a = 0.0;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1) a += alpha[i];
    best = std::max(best, costs[mask] - a);
  }
  return best;
}

// brute-force game value over an alpha grid (oracle for small N)
double grid_value(const std::vector<double>& costs, int n, int steps) {
  double best = 1e300;
  if (n == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double a0 = static_cast<double>(i) / steps;
      best = std::min(best, game_payoff(costs, {a0, 1.0 - a0}));
    }
  } else if (n == 3) {
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j + i <= steps; ++j) {
        const double a0 = static_cast<double>(i) / steps;
        const double a1 = static_cast<double>(j) / steps;
        best = std::min(best, game_payoff(costs, {a0, a1, 1.0 - a0 - a1}));
      }
  }
  return best;
}

// full-state DP without the normalization layer (oracle for equivariance)
struct BruteDp {
  int M, N;
  std::map<std::pair<int, std::array<int, 4>>, double> memo;

  double value(int m, std::array<int, 4> x) {
    if (m == M) {
      int best = x[0];
      for (int i = 1; i < N; ++i) best = std::max(best, x[i]);
      return best;
    }
    auto key = std::make_pair(m, x);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<double> costs(1 << N);
    for (int mask = 0; mask < (1 << N); ++mask) {
      std::array<int, 4> child = x;
      for (int i = 0; i < N; ++i)
        if ((mask >> i) & 1) ++child[i];
      costs[mask] = value(m + 1, child);
    }
    const double v = bellman_value(costs, N).value;
    memo.emplace(key, v);
    return v;
  }
};

}  // namespace

TEST_CASE("bellman_value hand examples") {
  // unit cost on any nonempty subset: worst case is the least likely expert
  std::vector<double> c(16, 1.0);
  c[0] = 0.0;
  auto sol = bellman_value(c, 4);
  CHECK(sol.value == doctest::Approx(0.75).epsilon(1e-10));
  double sum = 0.0;
  for (double a : sol.mixture) {
    CHECK(a >= -1e-12);
    sum += a;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(game_payoff(c, sol.mixture) == doctest::Approx(sol.value).epsilon(1e-9));

  // constant cost: the empty subset binds
  std::vector<double> ck(16, 0.37);
  CHECK(bellman_value(ck, 4).value == doctest::Approx(0.37).epsilon(1e-10));

  // cost |J|: the full set binds at 4 - 1
  std::vector<double> cj(16);
  for (int mask = 0; mask < 16; ++mask) cj[mask] = __builtin_popcount(mask);
  CHECK(bellman_value(cj, 4).value == doctest::Approx(3.0).epsilon(1e-10));

  CHECK_THROWS_AS(bellman_value(std::vector<double>(8, 0.0), 4), std::domain_error);
  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(bellman_value(bad, 4), std::domain_error);
}

TEST_CASE("bellman_value agrees with a grid oracle and dominates mixed adversaries") {
  CounterRng rng(909, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_double() * 2);  // 2 or 3
    std::vector<double> costs(1 << n);
    for (double& c : costs) c = 4.0 * rng.next_double() - 2.0;
    const auto sol = bellman_value(costs, n);

    const double grid = grid_value(costs, n, 400);
    CHECK(sol.value <= grid + 1e-9);
    CHECK(sol.value == doctest::Approx(grid).epsilon(3e-3));
    CHECK(game_payoff(costs, sol.mixture) == doctest::Approx(sol.value).epsilon(1e-9));

    // any mixed adversary response is no better than the best pure one
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> beta(1 << n);
      double tot = 0.0;
      for (double& b : beta) {
        b = rng.next_double();
        tot += b;
      }
      double payoff = 0.0;
      for (int mask = 0; mask < (1 << n); ++mask) {
        double a = 0.0;
        for (int i = 0; i < n; ++i)
          if ((mask >> i) & 1) a += sol.mixture[i];
        payoff += beta[mask] / tot * (costs[mask] - a);
      }
      CHECK(payoff <= sol.value + 1e-9);
    }
  }
}

TEST_CASE("solve_exact pinned values") {
  CHECK(solve_exact(1, 4).root() == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(solve_exact(1, 3).root() == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(solve_exact(2, 2).root() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(solve_exact(2, 2).root() / std::sqrt(2.0) == doctest::Approx(0.35355339).epsilon(1e-7));

  // frozen oracle values of the exact four-expert game
  const double expected[8] = {0.75, 1.0, 1.15, 4.0 / 3.0, 1.45, 1.6, 1.7106667, 1.8277778};
  for (int M = 1; M <= 8; ++M)
    CHECK(solve_exact(M, 4).root() == doctest::Approx(expected[M - 1]).epsilon(1e-6));

  // frozen three-expert values
  CHECK(solve_exact(2, 3).root() == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  CHECK(solve_exact(4, 3).root() == doctest::Approx(1.125).epsilon(1e-9));
  CHECK(solve_exact(9, 3).root() == doctest::Approx(1.640625).epsilon(1e-9));

  CHECK_THROWS_AS(solve_exact(50, 4), ResourceError);
  CHECK_THROWS_AS(solve_exact(0, 4), std::domain_error);
  CHECK_THROWS_AS(solve_exact(4, 5), std::domain_error);
}

TEST_CASE("normalized DP equals the raw-state oracle; equivariance") {
  BruteDp brute{3, 3, {}};
  CHECK(solve_exact(3, 3).root() == doctest::Approx(brute.value(0, {0, 0, 0, 0})).epsilon(1e-10));

  // translation and permutation equivariance of the raw DP
  const double base = brute.value(1, {1, 0, 2, 0});
  CHECK(brute.value(1, {2, 1, 3, 0}) == doctest::Approx(base + 1.0).epsilon(1e-9));
  CHECK(brute.value(1, {0, 2, 1, 0}) == doctest::Approx(base).epsilon(1e-9));

  BruteDp brute4{2, 4, {}};
  CHECK(solve_exact(2, 4).root() == doctest::Approx(brute4.value(0, {0, 0, 0, 0})).epsilon(1e-10));
}

TEST_CASE("bellman consistency of stored layers") {
  const DPTable tab = solve_exact(4, 4);
  for (int m = 0; m < tab.M; ++m) {
    for (const auto& [key, stored] : tab.layers[m]) {
      std::array<int, 4> node;
      for (int k = 0; k < 4; ++k) node[k] = static_cast<int>((key >> (16 * k)) & 0xFFFFu);
      std::vector<double> costs(16);
      for (int mask = 0; mask < 16; ++mask) {
        std::array<int, 4> child = node;
        for (int i = 0; i < 4; ++i)
          if ((mask >> i) & 1) ++child[i];
        const auto [ck, off] = detail::normalize_state(child, 4);
        costs[mask] = tab.layers[m + 1].at(ck) + off;
      }
      CHECK(bellman_value(costs, 4).value == doctest::Approx(stored).epsilon(1e-9));
    }
  }
}

TEST_CASE("lower and upper games: pinned values and the sandwich") {
  CHECK(solve_fixed_adversary(1, 4).root() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(solve_fixed_player(1, 4).root() == doctest::Approx(0.75).epsilon(1e-10));
  CHECK_THROWS_AS(solve_fixed_adversary(2, 3), std::domain_error);
  CHECK_THROWS_AS(solve_fixed_player(2, 3), std::domain_error);

  // frozen oracle values
  CHECK(solve_fixed_adversary(4, 4).root() == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(solve_fixed_adversary(9, 4).root() == doctest::Approx(1.8828125).epsilon(1e-12));
  CHECK(solve_fixed_player(4, 4).root() == doctest::Approx(1.355171).epsilon(1e-5));

  for (int M = 1; M <= 6; ++M) {
    const double v = solve_exact(M, 4).root();
    const double lo = solve_fixed_adversary(M, 4).root();
    const double hi = solve_fixed_player(M, 4).root();
    CHECK(lo <= v + 1e-9);
    CHECK(v <= hi + 1e-9);
  }

  // restricting the adversary cannot raise the value
  for (int M : {7, 8})
    CHECK(solve_fixed_adversary(M, 4).root() <= solve_exact(M, 4).root() + 1e-9);
}

TEST_CASE("exact value grows with the horizon") {
  double prev = 0.0;
  for (int M = 1; M <= 8; ++M) {
    const double v = solve_exact(M, 4).root();
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("convergence_table shape and scaling") {
  const auto rows = convergence_table({1, 4}, 4);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].M == 1);
  CHECK(rows[0].v == doctest::Approx(0.75));
  CHECK(rows[1].scaled_v == doctest::Approx(rows[1].v / 2.0));
  CHECK(rows[1].scaled_lower <= rows[1].scaled_v + 1e-9);
  CHECK(rows[1].scaled_v <= rows[1].scaled_upper + 1e-9);

  const auto rows3 = convergence_table({2}, 3);
  CHECK(std::isnan(rows3[0].v_lower));
  CHECK(rows3[0].v == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("normalize_state sorts and offsets") {
  const auto [key, off] = detail::normalize_state({3, 1, 2, 1}, 4);
  CHECK(off == 1);
  std::array<int, 4> node;
  for (int k = 0; k < 4; ++k) node[k] = static_cast<int>((key >> (16 * k)) & 0xFFFFu);
  CHECK(node == std::array<int, 4>{0, 0, 1, 2});
}
