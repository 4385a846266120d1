#include "expert_lab/value4.hpp"

#include "expert_lab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace expertlab {

namespace {

constexpr double kInv8Sqrt2 = 1.0 / (8.0 * kSqrt2);
constexpr double kInv4Sqrt2 = 1.0 / (4.0 * kSqrt2);
constexpr double kInv16Sqrt2 = 1.0 / (16.0 * kSqrt2);

void validate_point(const EvalPoint& p) {
  if (!(p.T > 0.0)) throw std::domain_error("EvalPoint: T must be positive");
  if (!(p.t >= 0.0 && p.t <= p.T)) throw std::domain_error("EvalPoint: t must lie in [0, T]");
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(p.x[i])) throw std::domain_error("EvalPoint: non-finite state");
}

// Geometry of a query: sorted tie-collapsed coordinates and every scalar the
// integral / series representations are built from.
struct Geometry {
  Vector4d xo;
  std::array<int, 4> perm{};
  Vector4d A;      // alpha * xo
  double tx = 0;   // theta . xo, <= 0
  double tau = 0;  // T - t
  bool diagonal = false;
  bool mid_tie = false;  // xo[1] == xo[2], not diagonal
  double T0 = 0;         // pi / (2 |tx|), breakpoint spacing
  double Ttilde = 0;     // sqrt(tau) * T0
  Vector4d eta;          // -A / tx
};

Geometry analyze(double tau, const Vector4d& x, double eps_tie) {
  Geometry g;
  g.tau = tau;
  const RankedState rs = rank_state(x);
  g.perm = rs.perm;
  Vector4d sorted;
  for (int k = 0; k < 4; ++k) sorted[k] = rs.sorted[k];
  g.xo = collapse_ties(sorted, eps_tie);
  g.A = alpha_theta().alpha * g.xo;
  g.tx = (g.xo[0] + g.xo[1] - g.xo[2] - g.xo[3]) / kSqrt2;
  g.diagonal = (g.tx == 0.0);
  g.mid_tie = !g.diagonal && (g.xo[1] == g.xo[2]);
  if (!g.diagonal) {
    g.T0 = -kPi / (2.0 * g.tx);
    g.Ttilde = std::sqrt(tau) * g.T0;
    g.eta = -g.A / g.tx;
  }
  return g;
}

// Square-wave signs on panel m = [m T0, (m+1) T0]:
//   psi(r tx + pi/2): +1 for m mod 4 in {0,3}, else -1
//   psi(r tx):        -1 for m mod 4 in {0,1}, else +1
inline double sign_shifted(long m) {
  const long r = m & 3;
  return (r == 0 || r == 3) ? 1.0 : -1.0;
}
inline double sign_plain(long m) {
  return (m & 2) ? 1.0 : -1.0;
}

// Panel-by-panel Gauss-Legendre integration over r in (0, r_max) with
// breakpoints at multiples of T0. `bracket(r, sp, sz)` excludes the Gaussian
// envelope. Stops at r_max or after three consecutive negligible panels.
template <typename Bracket>
double integrate_panels(const Geometry& g, const QuadratureConfig& cfg, Bracket&& bracket) {
  const GaussLegendre& gl = gauss_legendre(cfg.nodes_per_panel);
  const double r_max = cfg.tail_sigma / std::sqrt(g.tau);
  const double width = g.diagonal ? r_max : g.T0;
  double acc = 0.0;
  int tiny_run = 0;
  const long max_panels = 2000000;
  for (long m = 0;; ++m) {
    const double a = m * width;
    if (a >= r_max) break;
    if (m >= max_panels)
      throw NumericError("value4 quadrature: panel budget exceeded", -kInv8Sqrt2 * acc);
    const double b = std::min((m + 1) * width, r_max);
    const double sp = g.diagonal ? 1.0 : sign_shifted(m);
    const double sz = g.diagonal ? 0.0 : sign_plain(m);
    const double panel = integrate_panel(
        [&](double r) { return std::exp(-g.tau * r * r) * bracket(r, sp, sz); }, a, b, gl);
    acc += panel;
    if (std::abs(panel) < cfg.rel_tol * std::abs(acc)) {
      if (++tiny_run >= 3) break;
    } else {
      tiny_run = 0;
    }
  }
  return acc;
}

// Lambda(r)/r^2 with the Taylor switch below r_switch (only reachable on the
// first panel where sp = +1, sz = -1).
struct ValueBracket {
  const Geometry& g;
  double r_switch;
  double S2, S3, S4, S5, S6;

  ValueBracket(const Geometry& geom, const QuadratureConfig& cfg) : g(geom) {
    r_switch = cfg.r_taylor * std::min(g.diagonal ? 1e300 : g.T0, 1.0 / std::sqrt(g.tau));
    S2 = S3 = S4 = S5 = S6 = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double a2 = g.A[k] * g.A[k];
      S2 += a2;
      S3 += a2 * g.A[k];
      S4 += a2 * a2;
      S5 += a2 * a2 * g.A[k];
      S6 += a2 * a2 * a2;
    }
  }

  double operator()(double r, double sp, double sz) const {
    if (r < r_switch)
      return -S2 / 2 - r * S3 / 6 + r * r * (S4 / 24 + r * (S5 / 120 - r * S6 / 720));
    double sc = 0.0, ss = 0.0;
    for (int k = 0; k < 4; ++k) {
      sc += std::cos(r * g.A[k]);
      ss += std::sin(r * g.A[k]);
    }
    return (sp * sc - 4.0 - sz * ss) / (r * r);
  }
};

Vector4d unrank(const Vector4d& ranked, const std::array<int, 4>& perm) {
  Vector4d out;
  for (int h = 0; h < 4; ++h) out[perm[h]] = ranked[h];
  return out;
}

// arg_{k,l} = (2l+1 + (-1)^{l+1} eta_k) / (4 T_tilde), shared by the S/L and
// erf-dual series.
inline double dual_arg(const Geometry& g, int l, int k) {
  const double sgn = (l & 1) ? 1.0 : -1.0;
  return (2.0 * l + 1.0 + sgn * g.eta[k]) / (4.0 * g.Ttilde);
}

// Kahan accumulator: the dual series can run to ~12 T_tilde terms near the
// diagonal, where naive summation order would cost several digits.
struct Compensated {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

SLProfile sl_profile_impl(const Geometry& g) {
  SLProfile out;
  out.T_tilde = g.Ttilde;
  out.beta = g.A / (2.0 * kPi * std::sqrt(g.tau));
  out.eta1 = g.eta[0];
  out.eta4 = g.eta[3];
  const double sqrt_pi = std::sqrt(kPi);
  for (int k = 0; k < 4; ++k) {
    Compensated s, l_sum;
    int tiny_run = 0;
    for (long l = 0;; ++l) {
      if (l > 40000000)
        throw NumericError("sl_profile: series budget exceeded", s.sum);
      const double v = dual_arg(g, static_cast<int>(l), k);
      const double gh = sqrt_pi * std::exp(-kPi * kPi * v * v);
      s.add(((l & 1) ? -1.0 : 1.0) * gh * 2.0 / ((2.0 * l + 1.0) * kPi));
      l_sum.add(gh);
      // consecutive terms belong to two interleaved parity grids; require
      // both to have decayed before truncating
      tiny_run = gh < 1e-18 ? tiny_run + 1 : 0;
      if (tiny_run >= 2 && l >= 3) break;
    }
    out.S[k] = 2.0 * s.sum;
    out.L[k] = 2.0 / kPi * l_sum.sum;
  }
  return out;
}

Matrix4d hessian_from_sl_ranked(const Geometry& g) {
  const SLProfile sl = sl_profile_impl(g);
  const AlphaTheta& at = alpha_theta();
  const double scale = 1.0 / (16.0 * std::sqrt(2.0 * g.tau));
  Matrix4d H;
  for (int h = 0; h < 4; ++h) {
    double aL = 0.0;
    for (int k = 0; k < 4; ++k) aL += at.alpha(k, h) * sl.L[k];
    for (int j = 0; j < 4; ++j) {
      double ss = 0.0;
      for (int k = 0; k < 4; ++k) ss += at.alpha(k, h) * at.alpha(k, j) * sl.S[k];
      H(h, j) = scale * (ss + 2.0 * at.theta[j] * aL);
    }
  }
  return H;
}

// Lattice series of the Hessian representation off ties: for each rank h,
//   lat_h = 2 sum_{l>=0} (-1)^l e^{-tau (pi(l+1/2)/tx)^2} (1/tx) sum_k 2 a_{k,h} sin(A_k pi(l+1/2)/tx)
//         - 2 sum_{l>=1} (-1)^l e^{-tau (pi l/tx)^2}      (1/tx) sum_k 2 a_{k,h} cos(A_k pi l/tx)
// (the l = 0 cosine term vanishes because columns of alpha sum to zero).
Vector4d hessian_lattice(const Geometry& g, const QuadratureConfig& cfg) {
  Vector4d lat = Vector4d::Zero();
  const double inv_tx = 1.0 / g.tx;
  const double decay = g.tau * kPi * kPi * inv_tx * inv_tx;
  const double tol = std::max(cfg.rel_tol * 1e-4, 1e-18);
  for (int l = 0;; ++l) {
    if (l > 2000000) throw NumericError("hessian lattice: series budget exceeded", 0.0);
    const double half = l + 0.5;
    const double pf_half = std::exp(-decay * half * half);
    const double pf_int = l >= 1 ? std::exp(-decay * l * l) : 0.0;
    if (pf_half < tol && (l == 0 || pf_int < tol) && l >= 1) break;
    const double sgn = (l & 1) ? -1.0 : 1.0;
    double sin_sum = 0.0, cos_sum = 0.0;
    Vector4d sins, coss;
    for (int k = 0; k < 4; ++k) {
      sins[k] = std::sin(g.A[k] * kPi * half * inv_tx);
      coss[k] = std::cos(g.A[k] * kPi * l * inv_tx);
      sin_sum += sins[k];
      cos_sum += coss[k];
    }
    for (int h = 0; h < 4; ++h) {
      // sum_k alpha_{k,h} v_k = (4 v_h - sum v) / sqrt(2)
      const double as = (4.0 * sins[h] - sin_sum) / kSqrt2;
      const double ac = (4.0 * coss[h] - cos_sum) / kSqrt2;
      lat[h] += sgn * 2.0 * (2.0 * pf_half * as - (l >= 1 ? 2.0 * pf_int * ac : 0.0)) * inv_tx;
    }
  }
  return lat;
}

Matrix4d hessian_integral_ranked(const Geometry& g, const QuadratureConfig& cfg) {
  const AlphaTheta& at = alpha_theta();
  if (g.diagonal) {
    const double c = kInv16Sqrt2 * std::sqrt(kPi / g.tau);
    Matrix4d H;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) H(i, j) = c * (i == j ? 6.0 : -2.0);
    return H;
  }

  // One Gauss pass accumulating the ten independent quadratic-form sums.
  const GaussLegendre& gl = gauss_legendre(cfg.nodes_per_panel);
  const double r_max = cfg.tail_sigma / std::sqrt(g.tau);
  Matrix4d acc = Matrix4d::Zero();
  const long max_panels = 2000000;
  double scale_track = 0.0;
  int tiny_run = 0;
  for (long m = 0;; ++m) {
    const double a = m * g.T0;
    if (a >= r_max) break;
    if (m >= max_panels) throw NumericError("hessian quadrature: panel budget exceeded", 0.0);
    const double b = std::min((m + 1) * g.T0, r_max);
    const double sp = sign_shifted(m);
    const double sz = sign_plain(m);
    const double mid = 0.5 * (a + b), half_w = 0.5 * (b - a);
    Matrix4d panel = Matrix4d::Zero();
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double r = mid + half_w * gl.nodes[q];
      const double env = gl.weights[q] * std::exp(-g.tau * r * r);
      Vector4d w;
      double W = 0.0;
      for (int k = 0; k < 4; ++k) {
        w[k] = sp * std::cos(r * g.A[k]) - sz * std::sin(r * g.A[k]);
        W += w[k];
      }
      for (int h = 0; h < 4; ++h) {
        panel(h, h) += env * (W + 8.0 * w[h]) / 2.0;
        for (int j = h + 1; j < 4; ++j)
          panel(h, j) += env * (W - 4.0 * w[h] - 4.0 * w[j]) / 2.0;
      }
    }
    panel *= half_w;
    acc += panel;
    const double pn = panel.cwiseAbs().maxCoeff();
    scale_track = std::max(scale_track, acc.cwiseAbs().maxCoeff());
    if (pn < cfg.rel_tol * std::max(scale_track, 1e-300)) {
      if (++tiny_run >= 3) break;
    } else {
      tiny_run = 0;
    }
  }
  for (int h = 0; h < 4; ++h)
    for (int j = 0; j < h; ++j) acc(h, j) = acc(j, h);

  Matrix4d H = kInv8Sqrt2 * acc;  // even integrand: full line = 2 * (0, inf)
  if (!g.mid_tie) {
    const Vector4d lat = hessian_lattice(g, cfg);
    for (int h = 0; h < 4; ++h)
      for (int j = 0; j < 4; ++j) H(h, j) += kInv16Sqrt2 * at.theta[j] * lat[h];
  }
  return H;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (nodes_per_panel < 8) throw std::domain_error("QuadratureConfig: nodes_per_panel >= 8");
  if (!(rel_tol > 0.0 && rel_tol <= 1e-4))
    throw std::domain_error("QuadratureConfig: rel_tol in (0, 1e-4]");
  if (!(tail_sigma >= 6.0)) throw std::domain_error("QuadratureConfig: tail_sigma >= 6");
  if (!(r_taylor > 0.0 && r_taylor <= 0.1))
    throw std::domain_error("QuadratureConfig: r_taylor in (0, 0.1]");
  if (!(eps_tie >= 0.0)) throw std::domain_error("QuadratureConfig: eps_tie >= 0");
}

double evaluate_lambda(double r, const Vector4d& xo) {
  const AlphaTheta& at = alpha_theta();
  const Vector4d A = at.alpha * xo;
  const double tx = (xo[0] + xo[1] - xo[2] - xo[3]) / kSqrt2;
  auto psi = [](double s) { const double v = std::sin(s); return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
  double sc = 0.0, ss = 0.0;
  for (int k = 0; k < 4; ++k) {
    sc += std::cos(r * A[k]);
    ss += std::sin(r * A[k]);
  }
  return psi(r * tx + kPi / 2) * sc - 4.0 - psi(r * tx) * ss;
}

double value4(const EvalPoint& p, const QuadratureConfig& cfg) {
  cfg.validate();
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) return p.x.maxCoeff();
  const double base = 0.25 * p.x.sum() + 0.5 * std::sqrt(tau * kPi / 2.0);
  const Geometry g = analyze(tau, p.x, cfg.eps_tie);
  if (g.diagonal) return base;
  const ValueBracket vb(g, cfg);
  const double integral = integrate_panels(g, cfg, vb);
  return -kInv8Sqrt2 * integral + base;
}

namespace detail {

Vector4d gradient4_ranked_quadrature(double tau, const Vector4d& xo, const QuadratureConfig& cfg) {
  Geometry g = analyze(tau, xo, cfg.eps_tie);
  if (g.diagonal) return Vector4d::Constant(0.25);
  const GaussLegendre& gl = gauss_legendre(cfg.nodes_per_panel);
  const double r_max = cfg.tail_sigma / std::sqrt(tau);
  const double r_switch = cfg.r_taylor * std::min(g.T0, 1.0 / std::sqrt(tau));
  Vector4d T1 = Vector4d::Zero(), T2 = Vector4d::Zero(), T3 = Vector4d::Zero(),
           T4 = Vector4d::Zero(), T5 = Vector4d::Zero();
  const AlphaTheta& at = alpha_theta();
  for (int h = 0; h < 4; ++h)
    for (int k = 0; k < 4; ++k) {
      const double a = at.alpha(k, h), Ak = g.A[k];
      T1[h] += a * Ak;
      T2[h] += a * Ak * Ak;
      T3[h] += a * Ak * Ak * Ak;
      T4[h] += a * Ak * Ak * Ak * Ak;
      T5[h] += a * Ak * Ak * Ak * Ak * Ak;
    }

  Vector4d acc = Vector4d::Zero();
  double scale_track = 0.0;
  int tiny_run = 0;
  for (long m = 0;; ++m) {
    const double a = m * g.T0;
    if (a >= r_max) break;
    if (m >= 2000000) throw NumericError("gradient quadrature: panel budget exceeded", 0.0);
    const double b = std::min((m + 1) * g.T0, r_max);
    const double sp = sign_shifted(m);
    const double sz = sign_plain(m);
    const double mid = 0.5 * (a + b), half_w = 0.5 * (b - a);
    Vector4d panel = Vector4d::Zero();
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double r = mid + half_w * gl.nodes[q];
      const double env = gl.weights[q] * std::exp(-tau * r * r);
      if (r < r_switch) {
        // first panel only (sp = +1, sz = -1)
        for (int h = 0; h < 4; ++h)
          panel[h] += env * (T1[h] + r * (T2[h] / 2 - r * (T3[h] / 6 + r * (T4[h] / 24 - r * T5[h] / 120))));
        continue;
      }
      double V = 0.0;
      Vector4d v;
      for (int k = 0; k < 4; ++k) {
        v[k] = sp * std::sin(r * g.A[k]) + sz * std::cos(r * g.A[k]);
        V += v[k];
      }
      for (int h = 0; h < 4; ++h) panel[h] += env * (4.0 * v[h] - V) / (kSqrt2 * r);
    }
    panel *= half_w;
    acc += panel;
    const double pn = panel.cwiseAbs().maxCoeff();
    scale_track = std::max(scale_track, acc.cwiseAbs().maxCoeff());
    if (pn < cfg.rel_tol * std::max(scale_track, 1e-300)) {
      if (++tiny_run >= 3) break;
    } else {
      tiny_run = 0;
    }
  }
  return Vector4d::Constant(0.25) + kInv8Sqrt2 * acc;  // even integrand
}

Vector4d gradient4_ranked_series(double tau, const Vector4d& xo) {
  Geometry g = analyze(tau, xo, 0.0);
  if (g.diagonal) return Vector4d::Constant(0.25);
  Vector4d sums = Vector4d::Zero();
  for (int l = 0;; ++l) {
    if (l > 20000000) throw NumericError("gradient series: budget exceeded", 0.0);
    Vector4d e;
    double E = 0.0, min_arg = 1e300;
    for (int k = 0; k < 4; ++k) {
      const double arg = kPi * dual_arg(g, l, k);
      min_arg = std::min(min_arg, arg);
      e[k] = std::erf(arg);
      E += e[k];
    }
    for (int h = 0; h < 4; ++h)
      sums[h] += (4.0 * e[h] - E) / (kSqrt2 * (2.0 * l + 1.0));
    if (min_arg > 6.5) break;  // all erf == 1, later terms cancel exactly
  }
  return Vector4d::Constant(0.25) - kInv4Sqrt2 * sums;
}

Vector4d gradient4_ranked(double tau, const Vector4d& xo, const QuadratureConfig& cfg) {
  Geometry g = analyze(tau, xo, cfg.eps_tie);
  if (g.diagonal) return Vector4d::Constant(0.25);
  if (g.Ttilde < 0.5) return gradient4_ranked_series(tau, g.xo);
  return gradient4_ranked_quadrature(tau, g.xo, cfg);
}

}  // namespace detail

Vector4d gradient4(const EvalPoint& p, const QuadratureConfig& cfg) {
  cfg.validate();
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("gradient4: undefined at t == T");
  const Geometry g = analyze(tau, p.x, cfg.eps_tie);
  if (g.diagonal) return Vector4d::Constant(0.25);
  return unrank(detail::gradient4_ranked(tau, g.xo, cfg), g.perm);
}

Vector4d probability_matching4(const EvalPoint& p, const QuadratureConfig& cfg, int* clamp_count) {
  Vector4d g = gradient4(p, cfg);
  int clamps = 0;
  for (int i = 0; i < 4; ++i) {
    if (g[i] < 0.0) {
      if (g[i] < -1e-10) ++clamps;
      g[i] = 0.0;
    } else if (g[i] > 1.0) {
      if (g[i] > 1.0 + 1e-10) ++clamps;
      g[i] = 1.0;
    }
  }
  const double s = g.sum();
  if (!(s > 0.0)) throw NumericError("probability_matching4: degenerate gradient", s);
  if (clamp_count) *clamp_count = clamps;
  return g / s;
}

Matrix4d hessian4_integral(const EvalPoint& p, const QuadratureConfig& cfg) {
  cfg.validate();
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("hessian4_integral: undefined at t == T");
  const Geometry g = analyze(tau, p.x, cfg.eps_tie);
  const Matrix4d Hr = hessian_integral_ranked(g, cfg);
  Matrix4d H;
  for (int h = 0; h < 4; ++h)
    for (int j = 0; j < 4; ++j) H(g.perm[h], g.perm[j]) = Hr(h, j);
  return H;
}

Matrix4d hessian4_from_sl(const EvalPoint& p) {
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("hessian4_from_sl: undefined at t == T");
  const Geometry g = analyze(tau, p.x, 1e-12);
  if (g.diagonal) throw std::domain_error("hessian4_from_sl: undefined on the diagonal");
  if (g.mid_tie || g.xo[0] == g.xo[1] || g.xo[2] == g.xo[3])
    throw std::domain_error("hessian4_from_sl: undefined at ties");
  const Matrix4d Hr = hessian_from_sl_ranked(g);
  Matrix4d H;
  for (int h = 0; h < 4; ++h)
    for (int j = 0; j < 4; ++j) H(g.perm[h], g.perm[j]) = Hr(h, j);
  return H;
}

Matrix4d hessian4(const EvalPoint& p, const QuadratureConfig& cfg) {
  cfg.validate();
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("hessian4: undefined at t == T");
  const Geometry g = analyze(tau, p.x, cfg.eps_tie);
  // The lattice series of the integral route decays by e^{-tau pi^2 (2l+1)/tx^2}
  // per term; once that factor is near 1 the dual series is the fast route.
  const bool ties = g.diagonal || g.mid_tie || g.xo[0] == g.xo[1] || g.xo[2] == g.xo[3];
  if (!ties && g.Ttilde < 0.05) return hessian4_from_sl(p);
  return hessian4_integral(p, cfg);
}

double dt_value4(const EvalPoint& p, const QuadratureConfig& cfg) {
  cfg.validate();
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("dt_value4: undefined at t == T");
  const Geometry g = analyze(tau, p.x, cfg.eps_tie);
  if (g.diagonal) return -0.25 * std::sqrt(kPi / (2.0 * tau));
  const double integral = integrate_panels(g, cfg, [&](double r, double sp, double sz) {
    double sc = 0.0, ss = 0.0;
    for (int k = 0; k < 4; ++k) {
      sc += std::cos(r * g.A[k]);
      ss += std::sin(r * g.A[k]);
    }
    return sp * sc - sz * ss;
  });
  return -kInv8Sqrt2 * integral;
}

SLProfile sl_profile(const EvalPoint& p) {
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("sl_profile: undefined at t == T");
  const Geometry g = analyze(tau, p.x, 1e-12);
  if (g.diagonal) throw std::domain_error("sl_profile: undefined on the diagonal");
  return sl_profile_impl(g);
}

double theta3(const ThetaArgs& a) {
  if (!(a.q >= 0.0 && a.q < 1.0)) throw std::domain_error("theta3: nome must lie in [0, 1)");
  double sum = 1.0;
  double qp = 1.0;
  for (int l = 1;; ++l) {
    qp = std::pow(a.q, static_cast<double>(l) * l);
    if (qp < 1e-16) break;
    sum += 2.0 * qp * std::cos(2.0 * l * a.z);
    if (l > 100000) break;
  }
  return sum;
}

double theta3_product(const ThetaArgs& a) {
  if (!(a.q >= 0.0 && a.q < 1.0)) throw std::domain_error("theta3_product: nome must lie in [0, 1)");
  double prod = 1.0;
  const double c2z = std::cos(2.0 * a.z);
  for (int l = 1;; ++l) {
    const double q2l = std::pow(a.q, 2.0 * l);
    const double q2lm1 = std::pow(a.q, 2.0 * l - 1.0);
    prod *= (1.0 - q2l) * (1.0 + 2.0 * q2lm1 * c2z + q2lm1 * q2lm1);
    if (q2lm1 < 1e-17) break;
    if (l > 100000) break;
  }
  return prod;
}

double geometric_value4(const Vector4d& x) {
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(x[i])) throw std::domain_error("geometric_value4: non-finite state");
  const Geometry g = analyze(1.0, x, 0.0);
  double cosh_sum = 0.0, sinh_sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    cosh_sum += std::cosh(g.A[k]);
    sinh_sum += std::sinh(g.A[k]);
  }
  double u = g.xo[3] - kSqrt2 / 4.0 * std::sinh(kSqrt2 * (g.xo[3] - g.xo[2]));
  u += kInv4Sqrt2 * std::atan(std::exp(g.tx)) * cosh_sum;
  // atanh diverges logarithmically on the diagonal while sinh_sum vanishes
  // linearly; the product limit is 0.
  if (g.tx < -1e-8) u += kInv4Sqrt2 * std::atanh(std::exp(g.tx)) * sinh_sum;
  return u;
}

double u_lambda(double lambda, const Vector4d& x) {
  if (!(lambda > 0.0)) throw std::domain_error("u_lambda: lambda must be positive");
  return std::pow(lambda, -1.5) * geometric_value4(Vector4d(std::sqrt(lambda) * x));
}

}  // namespace expertlab
