#include "expert_lab/pde_check.hpp"

#include "expert_lab/quadrature.hpp"
#include "expert_lab/value3.hpp"

#include <cmath>

namespace expertlab {

ResidualProfile residual_profile(const EvalPoint& p, double tol, const QuadratureConfig& cfg) {
  ResidualProfile out;
  out.tau = p.T - p.t;
  out.tol = tol;
  out.dt = dt_value4(p, cfg);
  const Matrix4d H = hessian4(p, cfg);
  out.comb_mask = comb_subset(VectorXd(p.x)).mask;
  double best = -1e300;
  for (std::uint32_t mask = 0; mask < 16; ++mask) {
    Vector4d e = Vector4d::Zero();
    for (int i = 0; i < 4; ++i)
      if ((mask >> i) & 1u) e[i] = 1.0;
    out.q[mask] = out.dt + 0.5 * e.dot(H * e);
    best = std::max(best, out.q[mask]);
  }
  for (std::uint32_t mask = 0; mask < 16; ++mask)
    if (out.q[mask] >= best - tol) out.argmax.push_back(mask);
  return out;
}

ThetaInequality theta_inequality_check(const EvalPoint& p) {
  const double tau = p.T - p.t;
  if (!(tau > 0.0)) throw std::domain_error("theta_inequality_check: requires t < T");
  const RankedState rs = rank_state(p.x);
  Vector4d xo;
  for (int k = 0; k < 4; ++k) xo[k] = rs.sorted[k];
  const Vector4d A = alpha_theta().alpha * xo;
  const double tx = (xo[0] + xo[1] - xo[2] - xo[3]) / kSqrt2;
  if (tx >= 0.0) throw std::domain_error("theta_inequality_check: diagonal state");
  ThetaInequality out;
  out.mu = kPi * A[0] / (4.0 * tx) + kPi / 4.0;
  out.nu = kPi * A[3] / (4.0 * tx) + kPi / 4.0;
  out.nome = std::exp(-kPi * kPi * tau / (4.0 * tx * tx));
  out.theta_mu = theta3({out.mu, out.nome});
  out.theta_nu = theta3({out.nu, out.nome});
  return out;
}

std::vector<std::pair<double, double>> terminal_probe(const Vector4d& x,
                                                      const std::vector<double>& kappas,
                                                      const QuadratureConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  const double phi = x.maxCoeff();
  for (double kappa : kappas) {
    if (!(kappa > 0.0)) throw std::domain_error("terminal_probe: kappa must be positive");
    const double u = value4({0.0, kappa, x}, cfg);
    out.emplace_back(kappa, std::abs(u - phi));
  }
  return out;
}

LaplaceBridgeResult laplace_bridge(const Vector4d& x, double lambda, double quad_T_max,
                                   const QuadratureConfig& cfg) {
  if (!(lambda > 0.0)) throw std::domain_error("laplace_bridge: lambda must be positive");
  if (quad_T_max <= 0.0) quad_T_max = 40.0 / lambda;

  // Substitute T = w^2 so the integrand is smooth at the origin:
  //   int_0^{Tmax} e^{-lambda T} u^T(0,x) dT = int_0^{sqrt(Tmax)} e^{-lambda w^2} u(0,w^2,x) 2w dw
  const GaussLegendre& gl = gauss_legendre(16);
  const double w_max = std::sqrt(quad_T_max);
  const int n_panels = 32;
  double acc = 0.0;
  for (int pnl = 0; pnl < n_panels; ++pnl) {
    const double a = w_max * pnl / n_panels;
    const double b = w_max * (pnl + 1) / n_panels;
    acc += integrate_panel(
        [&](double w) {
          return std::exp(-lambda * w * w) * value4({0.0, w * w, x}, cfg) * 2.0 * w;
        },
        a, b, gl);
  }
  LaplaceBridgeResult out;
  const double phi = x.maxCoeff();
  // analytic tail: beyond Tmax the value is Phi(x) up to bounded growth
  acc += std::exp(-lambda * quad_T_max) * phi / lambda;
  out.tail_bound = std::exp(-lambda * quad_T_max) *
                   (std::abs(phi) + quad_T_max + 1.0 + x.norm()) / lambda;
  out.lhs = acc;
  out.rhs = u_lambda(lambda, x);
  return out;
}

RatioResult ratio_check(const QuadratureConfig& cfg) {
  RatioResult r;
  r.n4 = value4({0, 1, Vector4d::Zero()}, cfg) / geometric_value4(Vector4d::Zero());
  r.n3 = value3({0, 1, Vector3d::Zero()}) / geometric_value3(Vector3d::Zero());
  return r;
}

FdReport fd_validate(const EvalPoint& p, double h, const QuadratureConfig& cfg) {
  if (!(h >= 1e-6 && h <= 1e-3)) throw std::domain_error("fd_validate: h must lie in [1e-6, 1e-3]");
  FdReport rep;
  rep.h_grad = h;
  rep.h_hess = std::max(h, 2.5e-4);  // second differences need a larger step

  const Vector4d g = gradient4(p, cfg);
  Vector4d gfd;
  for (int i = 0; i < 4; ++i) {
    EvalPoint up = p, dn = p;
    up.x[i] += h;
    dn.x[i] -= h;
    gfd[i] = (value4(up, cfg) - value4(dn, cfg)) / (2 * h);
  }
  rep.grad_err = (g - gfd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());

  const Matrix4d H = hessian4(p, cfg);
  const double hh = rep.h_hess;
  Matrix4d Hfd;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EvalPoint pp = p, pm = p, mp = p, mm = p;
      pp.x[i] += hh; pp.x[j] += hh;
      pm.x[i] += hh; pm.x[j] -= hh;
      mp.x[i] -= hh; mp.x[j] += hh;
      mm.x[i] -= hh; mm.x[j] -= hh;
      Hfd(i, j) =
          (value4(pp, cfg) - value4(pm, cfg) - value4(mp, cfg) + value4(mm, cfg)) / (4 * hh * hh);
    }
  rep.hess_err = (H - Hfd).cwiseAbs().maxCoeff() / std::max(1.0, H.cwiseAbs().maxCoeff());

  const double dt = dt_value4(p, cfg);
  double dt_fd;
  if (p.t >= h) {
    EvalPoint up = p, dn = p;
    up.t += h;
    dn.t -= h;
    dt_fd = (value4(up, cfg) - value4(dn, cfg)) / (2 * h);
  } else {
    // lean on time homogeneity: d/dt u(t, T) = -d/dT u(t, T)
    EvalPoint up = p, dn = p;
    up.T += h;
    dn.T -= h;
    dt_fd = -(value4(up, cfg) - value4(dn, cfg)) / (2 * h);
  }
  rep.dt_err = std::abs(dt - dt_fd) / std::max(1.0, std::abs(dt));
  return rep;
}

Vector4d random_state4(CounterRng& rng, double lo, double hi, double min_gap) {
  for (;;) {
    Vector4d x;
    for (int i = 0; i < 4; ++i) x[i] = lo + (hi - lo) * rng.next_double();
    if (min_gap <= 0.0) return x;
    const RankedState rs = rank_state(x);
    bool ok = true;
    for (int k = 1; k < 4; ++k) ok &= (rs.sorted[k] - rs.sorted[k - 1] > min_gap);
    if (ok) return x;
  }
}

}  // namespace expertlab
