#include "expert_lab/discrete_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace expertlab {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Dense two-phase tableau simplex with Bland's rule for
//   min c.x  s.t.  A x = b, x >= 0,  with b >= 0.
struct SimplexProblem {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> c;
};

struct SimplexOut {
  double value;
  std::vector<double> x;
};

SimplexOut simplex_eq(SimplexProblem pr) {
  const int m = static_cast<int>(pr.A.size());
  const int n = static_cast<int>(pr.c.size());
  const int total = n + m;  // + artificials

  std::vector<std::vector<double>> T(m, std::vector<double>(total + 1, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = pr.A[i][j];
    T[i][n + i] = 1.0;
    T[i][total] = pr.b[i];
    basis[i] = n + i;
  }

  auto run_phase = [&](const std::vector<double>& cost, bool forbid_artificial) -> double {
    for (int iter = 0;; ++iter) {
      if (iter > 20000) throw NumericError("simplex: iteration budget exceeded", 0.0);
      // reduced costs with Bland's entering rule: lowest eligible index
      int enter = -1;
      for (int j = 0; j < total; ++j) {
        if (forbid_artificial && j >= n) break;
        bool is_basic = false;
        for (int i = 0; i < m; ++i) is_basic |= (basis[i] == j);
        if (is_basic) continue;
        double rc = cost[j];
        for (int i = 0; i < m; ++i) rc -= cost[basis[i]] * T[i][j];
        if (rc < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) break;
      // ratio test, ties broken by smallest basic index (Bland)
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T[i][enter] > kPivotTol) {
          const double ratio = T[i][total] / T[i][enter];
          if (ratio < best_ratio - 1e-15 ||
              (ratio < best_ratio + 1e-15 && (leave < 0 || basis[i] < basis[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) throw NumericError("simplex: unbounded phase", 0.0);
      // pivot
      const double piv = T[leave][enter];
      for (int j = 0; j <= total; ++j) T[leave][j] /= piv;
      for (int i = 0; i < m; ++i) {
        if (i == leave) continue;
        const double f = T[i][enter];
        if (f == 0.0) continue;
        for (int j = 0; j <= total; ++j) T[i][j] -= f * T[leave][j];
      }
      basis[leave] = enter;
    }
    double obj = 0.0;
    for (int i = 0; i < m; ++i) obj += cost[basis[i]] * T[i][total];
    return obj;
  };

  // phase 1: drive artificials out
  std::vector<double> cost1(total, 0.0);
  for (int j = n; j < total; ++j) cost1[j] = 1.0;
  const double infeas = run_phase(cost1, false);
  if (infeas > kFeasTol) throw NumericError("simplex: infeasible system", infeas);
  // a basic artificial stuck at level ~0 is harmless for the optimum; pivot
  // it out when a real column is available so phase 2 ignores artificials
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(T[i][j]) > 1e-8) {
        const double piv = T[i][j];
        for (int k = 0; k <= total; ++k) T[i][k] /= piv;
        for (int r = 0; r < m; ++r) {
          if (r == i) continue;
          const double f = T[r][j];
          if (f == 0.0) continue;
          for (int k = 0; k <= total; ++k) T[r][k] -= f * T[i][k];
        }
        basis[i] = j;
        break;
      }
    }
  }

  std::vector<double> cost2(total, 0.0);
  for (int j = 0; j < n; ++j) cost2[j] = pr.c[j];
  const double obj = run_phase(cost2, true);

  SimplexOut out;
  out.value = obj;
  out.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) out.x[basis[i]] = T[i][total];
  return out;
}

std::array<int, 4> unpack_node(std::uint64_t key, int n) {
  std::array<int, 4> node{0, 0, 0, 0};
  for (int k = 0; k < n; ++k) node[k] = static_cast<int>((key >> (16 * k)) & 0xFFFFu);
  return node;
}

void validate_rounds(int M, const DPConfig& cfg) {
  if (M < 1) throw std::domain_error("discrete game: M must be >= 1");
  if (M > cfg.max_rounds)
    throw ResourceError("discrete game: M exceeds the configured budget", 0);
  if (M > 60000) throw std::domain_error("discrete game: M too large for node packing");
}

template <typename Body>
double memoized(DPTable& tab, int m, std::uint64_t key, Body&& body) {
  auto& layer = tab.layers[m];
  auto it = layer.find(key);
  if (it != layer.end()) return it->second;
  const double v = body();
  tab.layers[m].emplace(key, v);
  return v;
}

double exact_value(DPTable& tab, int m, std::uint64_t key) {
  return memoized(tab, m, key, [&]() -> double {
    const auto node = unpack_node(key, tab.N);
    if (m == tab.M) return static_cast<double>(node[tab.N - 1]);
    const int n_masks = 1 << tab.N;
    std::vector<double> costs(n_masks);
    for (int mask = 0; mask < n_masks; ++mask) {
      std::array<int, 4> child = node;
      for (int i = 0; i < tab.N; ++i)
        if ((mask >> i) & 1) ++child[i];
      const auto [ck, off] = detail::normalize_state(child, tab.N);
      costs[mask] = exact_value(tab, m + 1, ck) + off;
    }
    return bellman_value(costs, tab.N).value;
  });
}

double lower_value(DPTable& tab, int m, std::uint64_t key) {
  return memoized(tab, m, key, [&]() -> double {
    const auto node = unpack_node(key, 4);
    if (m == tab.M) return static_cast<double>(node[3]);
    // comb on a sorted node: ranks {2,4}; complement {1,3}
    static constexpr int eC[4] = {0, 1, 0, 1};
    static constexpr int eCc[4] = {1, 0, 1, 0};
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
      double tot = 0.0;
      for (const int* e : {eC, eCc}) {
        std::array<int, 4> child;
        const int followed = e[i];
        for (int k = 0; k < 4; ++k) child[k] = node[k] + e[k] - followed;
        const auto [ck, off] = detail::normalize_state(child, 4);
        tot += 0.5 * (lower_value(tab, m + 1, ck) + off);
      }
      best = std::min(best, tot);
    }
    return best;
  });
}

struct UpperContext {
  QuadratureConfig qcfg;
  double inv_sqrt_M = 0.0;
};

double upper_value(DPTable& tab, const UpperContext& ctx, int m, std::uint64_t key) {
  return memoized(tab, m, key, [&]() -> double {
    const auto node = unpack_node(key, 4);
    if (m == tab.M) return static_cast<double>(node[3]);
    // probability matching at the scaled sorted state, decision time m/M
    const double tau = static_cast<double>(tab.M - m) / tab.M;
    Vector4d xo;
    for (int k = 0; k < 4; ++k) xo[k] = node[k] * ctx.inv_sqrt_M;
    Vector4d g = detail::gradient4_ranked(tau, xo, ctx.qcfg);
    double best = -std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 16; ++mask) {
      std::array<int, 4> child = node;
      double penalty = 0.0;
      for (int i = 0; i < 4; ++i)
        if ((mask >> i) & 1) {
          ++child[i];
          penalty += g[i];
        }
      const auto [ck, off] = detail::normalize_state(child, 4);
      best = std::max(best, upper_value(tab, ctx, m + 1, ck) + off - penalty);
    }
    return best;
  });
}

}  // namespace

namespace detail {

std::uint64_t pack_node(const std::array<int, 4>& sorted, int n) {
  std::uint64_t key = 0;
  for (int k = 0; k < n; ++k)
    key |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(sorted[k]) & 0xFFFFu) << (16 * k);
  return key;
}

std::pair<std::uint64_t, int> normalize_state(std::array<int, 4> state, int n) {
  std::sort(state.begin(), state.begin() + n);
  const int off = state[0];
  for (int k = 0; k < n; ++k) state[k] -= off;
  return {pack_node(state, n), off};
}

}  // namespace detail

MatrixGameSolution bellman_value(const std::vector<double>& subset_cost, int n_experts) {
  if (n_experts < 2 || n_experts > 4)
    throw std::domain_error("bellman_value: expert count must be 2, 3 or 4");
  const int n_masks = 1 << n_experts;
  if (static_cast<int>(subset_cost.size()) != n_masks)
    throw std::domain_error("bellman_value: cost map must cover every subset");
  for (double c : subset_cost)
    if (!std::isfinite(c)) throw std::domain_error("bellman_value: non-finite cost");

  // Variables (alpha_1..alpha_N, w) with w = value - cost(empty) >= 0:
  //   w + sum_{i in J} alpha_i >= c_J - c_empty   for J != empty
  //   sum alpha_i = 1
  const double c0 = subset_cost[0];
  SimplexProblem pr;
  const int nv = n_experts + 1 + (n_masks - 1);  // alphas, w, surplus per inequality
  pr.c.assign(nv, 0.0);
  pr.c[n_experts] = 1.0;
  int surplus = n_experts + 1;
  for (int mask = 1; mask < n_masks; ++mask, ++surplus) {
    std::vector<double> row(nv, 0.0);
    double rhs = subset_cost[mask] - c0;
    row[n_experts] = 1.0;
    for (int i = 0; i < n_experts; ++i)
      if ((mask >> i) & 1) row[i] = 1.0;
    row[surplus] = -1.0;
    if (rhs < 0.0) {
      for (double& v : row) v = -v;
      rhs = -rhs;
    }
    pr.A.push_back(std::move(row));
    pr.b.push_back(rhs);
  }
  std::vector<double> row(nv, 0.0);
  for (int i = 0; i < n_experts; ++i) row[i] = 1.0;
  pr.A.push_back(std::move(row));
  pr.b.push_back(1.0);

  const SimplexOut out = simplex_eq(std::move(pr));
  MatrixGameSolution sol;
  sol.value = out.value + c0;
  sol.mixture.assign(out.x.begin(), out.x.begin() + n_experts);
  return sol;
}

double DPTable::root() const {
  return layers.at(0).at(0);
}

std::size_t DPTable::node_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

DPTable solve_exact(int M, int N, const DPConfig& cfg) {
  validate_rounds(M, cfg);
  if (N < 2 || N > 4) throw std::domain_error("solve_exact: expert count must be 2, 3 or 4");
  DPTable tab;
  tab.M = M;
  tab.N = N;
  tab.kind = GameKind::exact;
  tab.layers.resize(M + 1);
  exact_value(tab, 0, 0);
  return tab;
}

DPTable solve_fixed_adversary(int M, int N, const DPConfig& cfg) {
  validate_rounds(M, cfg);
  if (N != 4) throw std::domain_error("solve_fixed_adversary: four experts only");
  DPTable tab;
  tab.M = M;
  tab.N = 4;
  tab.kind = GameKind::fixed_adversary;
  tab.layers.resize(M + 1);
  lower_value(tab, 0, 0);
  return tab;
}

DPTable solve_fixed_player(int M, int N, const QuadratureConfig& qcfg, const DPConfig& cfg) {
  validate_rounds(M, cfg);
  if (N != 4) throw std::domain_error("solve_fixed_player: four experts only");
  qcfg.validate();
  DPTable tab;
  tab.M = M;
  tab.N = 4;
  tab.kind = GameKind::fixed_player;
  tab.layers.resize(M + 1);
  UpperContext ctx{qcfg, 1.0 / std::sqrt(static_cast<double>(M))};
  upper_value(tab, ctx, 0, 0);
  return tab;
}

std::vector<ConvergenceRow> convergence_table(const std::vector<int>& Ms, int N,
                                              const QuadratureConfig& qcfg, const DPConfig& cfg) {
  std::vector<ConvergenceRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int M : Ms) {
    ConvergenceRow r;
    r.M = M;
    const double s = std::sqrt(static_cast<double>(M));
    r.v = solve_exact(M, N, cfg).root();
    r.scaled_v = r.v / s;
    if (N == 4) {
      r.v_lower = solve_fixed_adversary(M, N, cfg).root();
      r.v_upper = solve_fixed_player(M, N, qcfg, cfg).root();
      r.scaled_lower = r.v_lower / s;
      r.scaled_upper = r.v_upper / s;
    } else {
      r.v_lower = r.v_upper = r.scaled_lower = r.scaled_upper = nan;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace expertlab
