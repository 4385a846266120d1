#include "expert_lab/verify.hpp"

#include "expert_lab/discrete_game.hpp"
#include "expert_lab/pde_check.hpp"
#include "expert_lab/quadrature.hpp"
#include "expert_lab/simulator.hpp"
#include "expert_lab/value3.hpp"
#include "expert_lab/value4.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace expertlab {

namespace {

using Clock = std::chrono::steady_clock;

struct Ctx {
  AcceptanceOptions opt;
  QuadratureConfig qcfg;
  std::vector<CheckResult>* out;

  void add(int criterion, const std::string& name, bool pass, double observed, double tolerance,
           std::string note = "") {
    out->push_back({criterion, name, pass, observed, tolerance, std::move(note)});
  }
  // worst-case style: pass iff observed <= tolerance
  void add_max(int criterion, const std::string& name, double observed, double tolerance,
               std::string note = "") {
    add(criterion, name, observed <= tolerance, observed, tolerance, std::move(note));
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: closed-form constants
// ---------------------------------------------------------------------------
void criterion1(Ctx& c) {
  const double v4_0 = value4({0, 1, Vector4d::Zero()}, c.qcfg);
  const double g4_0 = geometric_value4(Vector4d::Zero());
  const double v3_0 = value3({0, 1, Vector3d::Zero()});
  const double g3_0 = geometric_value3(Vector3d::Zero());
  const RatioResult ratios = ratio_check(c.qcfg);
  c.add_max(1, "value4(0,1,0) vs 0.6266570687", std::abs(v4_0 - 0.6266570687), 1e-6);
  c.add_max(1, "geometric_value4(0) vs 0.5553603673", std::abs(g4_0 - 0.5553603673), 1e-9);
  c.add_max(1, "value3(0,1,0) vs 0.5319230406", std::abs(v3_0 - 0.5319230406), 1e-9);
  c.add_max(1, "geometric_value3(0) vs 0.4714045208", std::abs(g3_0 - 0.4714045208), 1e-9);
  c.add_max(1, "ratio n4 vs 1.1283791671", std::abs(ratios.n4 - 1.1283791671), 1e-6);
  c.add_max(1, "ratio n3 vs 1.1283791671", std::abs(ratios.n3 - 1.1283791671), 1e-6);
}

// ---------------------------------------------------------------------------
// criterion 2: derivatives vs central finite differences on seeded states
// ---------------------------------------------------------------------------
void criterion2(Ctx& c) {
  const int n_states = c.opt.smoke ? 20 : 200;
  double worst_grad = 0.0, worst_hess = 0.0, worst_dt = 0.0, worst_sum = 0.0, worst_h1 = 0.0;
  for (int i = 0; i < n_states; ++i) {
    CounterRng rng(c.opt.seed, 2000 + i);
    const Vector4d x = random_state4(rng, -2.5, 2.5, 0.1);
    const double t = 0.9 * rng.next_double();
    const EvalPoint p{t, 1.0, x};
    const FdReport rep = fd_validate(p, 1e-5, c.qcfg);
    worst_grad = std::max(worst_grad, rep.grad_err);
    worst_hess = std::max(worst_hess, rep.hess_err);
    worst_dt = std::max(worst_dt, rep.dt_err);
    const Vector4d g = gradient4(p, c.qcfg);
    worst_sum = std::max(worst_sum, std::abs(g.sum() - 1.0));
    const Matrix4d H = hessian4(p, c.qcfg);
    worst_h1 = std::max(worst_h1, (H * Vector4d::Ones()).cwiseAbs().maxCoeff());
  }
  c.add_max(2, "gradient vs finite differences (relative)", worst_grad, 1e-5);
  c.add_max(2, "hessian vs finite differences (relative)", worst_hess, 1e-4);
  c.add_max(2, "dt vs finite differences (relative)", worst_dt, 1e-5);
  c.add_max(2, "gradient components sum to 1", worst_sum, 1e-9);
  c.add_max(2, "H . ones == 0", worst_h1, 1e-8);
}

// ---------------------------------------------------------------------------
// criterion 3: representation cross-checks (S/L dual forms)
// ---------------------------------------------------------------------------

// Independent oracle: the defining integral of S_k by panel quadrature.
Vector4d s_defining_integral(double tau, const Vector4d& xo) {
  const Vector4d A = alpha_theta().alpha * xo;
  const double tx = (xo[0] + xo[1] - xo[2] - xo[3]) / kSqrt2;
  const double T0 = -kPi / (2.0 * tx);
  const double r_max = 9.0 / std::sqrt(tau);
  const GaussLegendre& gl = gauss_legendre(32);
  Vector4d acc = Vector4d::Zero();
  for (long m = 0; m * T0 < r_max; ++m) {
    const double a = m * T0;
    const double b = std::min((m + 1) * T0, r_max);
    const long r4 = m & 3;
    const double sp = (r4 == 0 || r4 == 3) ? 1.0 : -1.0;
    const double sz = (m & 2) ? 1.0 : -1.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double r = mid + half * gl.nodes[q];
      const double env = gl.weights[q] * std::exp(-tau * r * r) * half;
      for (int k = 0; k < 4; ++k)
        acc[k] += env * (sp * std::cos(r * A[k]) - sz * std::sin(r * A[k]));
    }
  }
  return 2.0 * std::sqrt(tau) * acc;  // even integrand, full line
}

void criterion3(Ctx& c) {
  const int n_states = c.opt.smoke ? 20 : 200;
  double worst_hess = 0.0, worst_s = 0.0;
  for (int i = 0; i < n_states; ++i) {
    CounterRng rng(c.opt.seed, 2000 + i);  // same states as criterion 2
    const Vector4d x = random_state4(rng, -2.5, 2.5, 0.1);
    const double t = 0.9 * rng.next_double();
    const EvalPoint p{t, 1.0, x};
    const Matrix4d Hs = hessian4_from_sl(p);
    const Matrix4d Hi = hessian4_integral(p, c.qcfg);
    worst_hess = std::max(worst_hess, (Hs - Hi).cwiseAbs().maxCoeff());

    const SLProfile sl = sl_profile(p);
    const RankedState rs = rank_state(p.x);
    Vector4d xo;
    for (int k = 0; k < 4; ++k) xo[k] = rs.sorted[k];
    const Vector4d s_int = s_defining_integral(1.0 - t, xo);
    worst_s = std::max(worst_s, (sl.S - s_int).cwiseAbs().maxCoeff());
  }
  c.add_max(3, "hessian4_from_sl vs hessian4_integral (max abs)", worst_hess, 1e-7);
  c.add_max(3, "S_k dual series vs defining integral (max abs)", worst_s, 1e-9);
}

// ---------------------------------------------------------------------------
// criterion 4: PDE optimality residual structure
// ---------------------------------------------------------------------------
void criterion4(Ctx& c) {
  const int n_states = c.opt.smoke ? 60 : 1000;
  double worst_q = -1e300, worst_cross = 0.0, worst_pair = 0.0;
  double worst_theta = -1e300, worst_sorder = -1e300;
  for (int i = 0; i < n_states; ++i) {
    CounterRng rng(c.opt.seed, 4000 + i);
    const Vector4d x = random_state4(rng, -2.5, 2.5, 1e-6);
    const double tau = 0.01 + 9.99 * rng.next_double();
    const EvalPoint p{0.0, tau, x};
    const double scale = std::sqrt(tau);

    const ResidualProfile rp = residual_profile(p, 1e-9, c.qcfg);
    const RankedState rs = rank_state(x);
    const auto rank_mask = [&](int h1, int h2) -> std::uint32_t {
      return (1u << rs.perm[h1]) | (1u << rs.perm[h2]);
    };
    const std::set<std::uint32_t> crossing = {rank_mask(0, 2), rank_mask(0, 3),
                                              rank_mask(1, 2), rank_mask(1, 3)};
    for (std::uint32_t mask = 0; mask < 16; ++mask) {
      worst_q = std::max(worst_q, scale * rp.q[mask]);
      worst_pair = std::max(worst_pair, scale * std::abs(rp.q[mask] - rp.q[15 - mask]));
      if (crossing.count(mask) || crossing.count(15 - mask))
        worst_cross = std::max(worst_cross, scale * std::abs(rp.q[mask]));
    }

    const ThetaInequality ti = theta_inequality_check(p);
    worst_theta = std::max(worst_theta, ti.theta_mu - ti.theta_nu);

    const SLProfile sl = sl_profile(p);
    worst_sorder = std::max({worst_sorder, sl.S[0] - sl.S[1], sl.S[1] - sl.S[3], sl.S[2] - sl.S[3]});
  }
  c.add_max(4, "all residuals sqrt(tau) q_J <= tol", worst_q, 1e-6);
  c.add_max(4, "crossing-pair residuals vanish", worst_cross, 1e-6);
  c.add_max(4, "q_J == q_Jc", worst_pair, 1e-8);
  c.add_max(4, "theta3(mu) <= theta3(nu)", worst_theta, 1e-12);
  c.add_max(4, "S-order inequalities", worst_sorder, 1e-10);
}

// ---------------------------------------------------------------------------
// criterion 5: terminal condition
// ---------------------------------------------------------------------------
void criterion5(Ctx& c) {
  const int n_states = c.opt.smoke ? 10 : 50;
  double worst3 = 0.0, worst5 = 0.0;
  for (int i = 0; i < n_states; ++i) {
    CounterRng rng(c.opt.seed, 5000 + i);
    const Vector4d x = random_state4(rng, -2.5, 2.5, 0.0);
    const auto gaps = terminal_probe(x, {1e-3, 1e-5}, c.qcfg);
    worst3 = std::max(worst3, gaps[0].second);
    worst5 = std::max(worst5, gaps[1].second);
  }
  c.add_max(5, "terminal gap at kappa=1e-3", worst3, 0.05);
  c.add_max(5, "terminal gap at kappa=1e-5", worst5, 0.005);

  double worst_diag = 0.0;
  for (double kappa : {1e-2, 1e-3, 1e-5}) {
    const auto g = terminal_probe(Vector4d::Zero(), {kappa}, c.qcfg);
    worst_diag = std::max(worst_diag, std::abs(g[0].second - 0.5 * std::sqrt(kappa * kPi / 2.0)));
  }
  c.add_max(5, "diagonal gap equals half sqrt(kappa pi/2)", worst_diag, 1e-10);
}

// ---------------------------------------------------------------------------
// criterion 6: Laplace bridge
// ---------------------------------------------------------------------------
void criterion6(Ctx& c) {
  const std::vector<double> lambdas = c.opt.smoke ? std::vector<double>{1.0}
                                                  : std::vector<double>{0.5, 1.0, 2.0};
  Vector4d x1;
  x1 << 0, 0, 0, 1;
  Vector4d x2;
  x2 << 0, 1, 2, 3;
  double worst = 0.0;
  for (double lam : lambdas)
    for (const Vector4d& x : {Vector4d(Vector4d::Zero()), x1, x2}) {
      const LaplaceBridgeResult lb = laplace_bridge(x, lam, 0.0, c.qcfg);
      worst = std::max(worst, std::abs(lb.lhs - lb.rhs));
    }
  c.add_max(6, "laplace transform of u^T vs scaled geometric value", worst, 1e-4);
}

// ---------------------------------------------------------------------------
// criterion 7: exact DP sandwich
// ---------------------------------------------------------------------------
void criterion7(Ctx& c) {
  DPConfig dcfg;
  c.add_max(7, "V^1(0,0) == 0.75 for four experts",
            std::abs(solve_exact(1, 4, dcfg).root() - 0.75), 1e-9);
  c.add_max(7, "V^1(0,0) == 2/3 for three experts",
            std::abs(solve_exact(1, 3, dcfg).root() - 2.0 / 3.0), 1e-9);

  const int sandwich_max = c.opt.smoke ? 4 : 8;
  double worst_sandwich = -1e300;
  for (int M = 1; M <= sandwich_max; ++M) {
    const double v = solve_exact(M, 4, dcfg).root();
    const double lo = solve_fixed_adversary(M, 4, dcfg).root();
    const double hi = solve_fixed_player(M, 4, c.qcfg, dcfg).root();
    worst_sandwich = std::max({worst_sandwich, lo - v, v - hi});
  }
  c.add_max(7, "sandwich V_lower <= V <= V_upper (M = 1..8)", worst_sandwich, 1e-9);

  const std::vector<int> Ms = c.opt.smoke ? std::vector<int>{4, 9} : std::vector<int>{4, 9, 16, 25, 36};
  std::vector<double> lo_scaled, hi_scaled;
  for (int M : Ms) {
    const double s = std::sqrt(static_cast<double>(M));
    lo_scaled.push_back(solve_fixed_adversary(M, 4, dcfg).root() / s);
    hi_scaled.push_back(solve_fixed_player(M, 4, c.qcfg, dcfg).root() / s);
  }
  double worst_lo_step = -1e300, worst_hi_step = -1e300;
  for (std::size_t i = 1; i < Ms.size(); ++i) {
    worst_lo_step = std::max(worst_lo_step, lo_scaled[i - 1] - lo_scaled[i]);
    worst_hi_step = std::max(worst_hi_step, hi_scaled[i] - hi_scaled[i - 1]);
  }
  std::string trend = "lower:";
  for (double v : lo_scaled) trend += " " + fmt(v);
  trend += "  upper:";
  for (double v : hi_scaled) trend += " " + fmt(v);
  c.add(7, "lower-game scaled trend increasing", worst_lo_step <= 1e-12, worst_lo_step, 0.0, trend);
  c.add(7, "upper-game scaled trend decreasing", worst_hi_step <= 1e-12, worst_hi_step, 0.0, trend);

  double lo_min = 1e300, hi_max = -1e300;
  for (double v : lo_scaled) lo_min = std::min(lo_min, v);
  for (double v : hi_scaled) hi_max = std::max(hi_max, v);
  c.add(7, "scaled bounds inside [0.50, 0.72]", lo_min >= 0.50 && hi_max <= 0.72,
        hi_max, 0.72, "min " + fmt(lo_min) + " max " + fmt(hi_max));
}

// ---------------------------------------------------------------------------
// criterion 8: Monte Carlo game at the saddle point
// ---------------------------------------------------------------------------
void criterion8(Ctx& c) {
  SimConfig cfg;
  cfg.M = c.opt.smoke ? 100 : 400;
  cfg.N = 4;
  cfg.paths = c.opt.smoke ? 20000 : 200000;
  cfg.seed = c.opt.seed;
  cfg.threads = c.opt.threads;
  cfg.player.kind = PlayerKind::probability_matching;
  cfg.adversary.kind = AdversaryKind::balanced_comb;
  const RegretEstimate est = estimate_regret(cfg);
  const double s = std::sqrt(static_cast<double>(cfg.M));
  const double scaled = est.mean / s;
  const double tol = 0.03 + (c.opt.smoke ? 4.0 * est.stderr_ / s : 0.0);
  c.add_max(8, "probability matching vs balanced comb, mean/sqrt(M) near 0.627",
            std::abs(scaled - 0.627), tol,
            "mean/sqrt(M) = " + fmt(scaled) + ", stderr = " + fmt(est.stderr_ / s) +
                ", clamps = " + fmt(double(est.clamp_count)));

  const RegretEstimate again = estimate_regret(cfg);
  const bool identical = est.mean == again.mean && est.stderr_ == again.stderr_;
  c.add(8, "repeated run with the same seed is bit-identical", identical,
        std::abs(est.mean - again.mean), 0.0);
}

// ---------------------------------------------------------------------------
// criterion 9: SDE Feynman-Kac estimate
// ---------------------------------------------------------------------------
void criterion9(Ctx& c) {
  SdeConfig cfg;
  cfg.point = {0.0, 1.0, Vector4d::Zero()};
  cfg.steps = c.opt.smoke ? 500 : 4000;
  cfg.paths = c.opt.smoke ? 40000 : 400000;
  cfg.seed = c.opt.seed;
  cfg.threads = c.opt.threads;
  const RegretEstimate est = sde_feynman_kac(cfg);
  const double tol = 0.01 + (c.opt.smoke ? 4.0 * est.stderr_ : 0.0);
  c.add_max(9, "comb-diffusion estimate of u^1(0,0)", std::abs(est.mean - 0.6267), tol,
            "mean = " + fmt(est.mean) + ", stderr = " + fmt(est.stderr_));
}

// ---------------------------------------------------------------------------
// criterion 10: invariance suite
// ---------------------------------------------------------------------------
void criterion10(Ctx& c) {
  const int n_states = c.opt.smoke ? 30 : 200;
  double worst_trans = 0.0, worst_perm = 0.0, worst_scale = 0.0;
  for (int i = 0; i < n_states; ++i) {
    CounterRng rng(c.opt.seed, 10000 + i);
    const Vector4d x = random_state4(rng, -2.5, 2.5, 0.0);
    const double t = 0.9 * rng.next_double();
    const EvalPoint p{t, 1.0, x};
    const double base = value4(p, c.qcfg);

    const double shift = 2.0 * rng.next_double() - 1.0;
    worst_trans = std::max(worst_trans,
                           std::abs(value4({t, 1.0, Vector4d(x.array() + shift)}, c.qcfg) -
                                    base - shift));

    Vector4d xp;
    xp << x[2], x[3], x[0], x[1];
    worst_perm = std::max(worst_perm, std::abs(value4({t, 1.0, xp}, c.qcfg) - base));

    const double lam = 0.5 + 1.5 * rng.next_double();
    worst_scale = std::max(
        worst_scale,
        std::abs(value4({lam * lam * t, lam * lam, Vector4d(lam * x)}, c.qcfg) - lam * base));
  }
  c.add_max(10, "translation adds the shift", worst_trans, 1e-10);
  c.add_max(10, "permutation symmetry", worst_perm, 1e-10);
  c.add_max(10, "parabolic scaling identity", worst_scale, 1e-8);
}

}  // namespace

std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<CheckResult> results;
  Ctx ctx{opt, QuadratureConfig{}, &results};
  ctx.opt.threads = resolve_threads(opt.threads);
  const auto want = [&](int k) {
    return opt.criteria.empty() ||
           std::find(opt.criteria.begin(), opt.criteria.end(), k) != opt.criteria.end();
  };
  if (want(1)) criterion1(ctx);
  if (want(2)) criterion2(ctx);
  if (want(3)) criterion3(ctx);
  if (want(4)) criterion4(ctx);
  if (want(5)) criterion5(ctx);
  if (want(6)) criterion6(ctx);
  if (want(7)) criterion7(ctx);
  if (want(8)) criterion8(ctx);
  if (want(9)) criterion9(ctx);
  if (want(10)) criterion10(ctx);
  return results;
}

void print_report(const std::vector<CheckResult>& results) {
  std::map<int, std::pair<int, int>> tally;  // criterion -> (pass, fail)
  for (const auto& r : results) {
    auto& t = tally[r.criterion];
    (r.pass ? t.first : t.second)++;
    std::printf("  [%s] c%d %s (observed %.6g, tolerance %.6g)%s%s\n", r.pass ? "pass" : "FAIL",
                r.criterion, r.name.c_str(), r.observed, r.tolerance,
                r.note.empty() ? "" : " -- ", r.note.c_str());
  }
  for (const auto& [criterion, counts] : tally)
    std::printf("[%s] criterion %d: %d/%d subchecks passed\n",
                counts.second == 0 ? "PASS" : "FAIL", criterion, counts.first,
                counts.first + counts.second);
}

int count_failures(const std::vector<CheckResult>& results) {
  std::set<int> failed;
  for (const auto& r : results)
    if (!r.pass) failed.insert(r.criterion);
  return static_cast<int>(failed.size());
}

}  // namespace expertlab
