#pragma once

#include "expert_lab/core.hpp"
#include "expert_lab/rng.hpp"
#include "expert_lab/value4.hpp"

#include <vector>

namespace expertlab {

/// Residuals q_J = dt u + (1/2) e_J^T H e_J for all 16 subsets, indexed by
/// original-expert bitmask. The comb subset must sit in the argmax set and
/// every residual must be <= tol (scale-free once multiplied by sqrt(T-t)).
struct ResidualProfile {
  double tau = 0.0;
  double dt = 0.0;
  std::array<double, 16> q{};
  std::uint32_t comb_mask = 0;
  std::vector<std::uint32_t> argmax;
  double tol = 0.0;
};

ResidualProfile residual_profile(const EvalPoint& p, double tol,
                                 const QuadratureConfig& cfg = {});

/// theta_3 phases and nome of the {bottom-pair} suboptimality inequality:
/// theta_mu <= theta_nu, with cos(2 mu) <= cos(2 nu).
struct ThetaInequality {
  double mu = 0.0;
  double nu = 0.0;
  double nome = 0.0;
  double theta_mu = 0.0;
  double theta_nu = 0.0;
};

ThetaInequality theta_inequality_check(const EvalPoint& p);

/// Gaps |u^T(T - kappa, T, x) - max_i x_i| for each horizon offset kappa.
std::vector<std::pair<double, double>> terminal_probe(const Vector4d& x,
                                                      const std::vector<double>& kappas,
                                                      const QuadratureConfig& cfg = {});

/// Laplace bridge: integral of e^{-lambda T} u^T(0,x) dT against the scaled
/// geometric value. tail_bound reports the discarded-tail estimate.
struct LaplaceBridgeResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double tail_bound = 0.0;
};

LaplaceBridgeResult laplace_bridge(const Vector4d& x, double lambda, double quad_T_max = 0.0,
                                   const QuadratureConfig& cfg = {});

/// Finite-vs-geometric ratios for four and three experts; both 2/sqrt(pi).
struct RatioResult {
  double n4 = 0.0;
  double n3 = 0.0;
};

RatioResult ratio_check(const QuadratureConfig& cfg = {});

/// Central-difference cross-check of the analytic derivatives. Errors are
/// max-entry differences scaled by max(1, max-entry magnitude).
struct FdReport {
  double grad_err = 0.0;
  double hess_err = 0.0;
  double dt_err = 0.0;
  double h_grad = 0.0;
  double h_hess = 0.0;
};

FdReport fd_validate(const EvalPoint& p, double h, const QuadratureConfig& cfg = {});

/// Seeded uniform state on [lo, hi]^4; resamples until all sorted gaps
/// exceed min_gap (when positive).
Vector4d random_state4(CounterRng& rng, double lo = -2.5, double hi = 2.5, double min_gap = 0.0);

}  // namespace expertlab
