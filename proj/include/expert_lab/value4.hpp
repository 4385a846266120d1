#pragma once

#include "expert_lab/core.hpp"

namespace expertlab {

/// Query point for the finite-horizon value function, 0 <= t <= T, T > 0.
struct EvalPoint {
  double t = 0.0;
  double T = 1.0;
  Vector4d x = Vector4d::Zero();
};

struct QuadratureConfig {
  int nodes_per_panel = 32;   // Gauss-Legendre order per breakpoint panel
  double rel_tol = 1e-12;     // series / panel truncation target
  double r_taylor = 1e-3;     // small-r switch, fraction of first breakpoint
  double tail_sigma = 8.5;    // integration cutoff in units of 1/sqrt(T-t)
  double eps_tie = 1e-12;     // absolute tolerance collapsing near-ties

  void validate() const;
};

/// Square-wave weighted Gaussian integrals S_k and their theta-type lattice
/// partners L_k, plus the scale quantities they are built from.
///   T_tilde = -sqrt(T-t) pi / (2 theta.x^o),  beta_k = alpha_k.x^o / (2 pi sqrt(T-t)),
///   eta_k = 4 T_tilde beta_k,  eta1 in [-3,-1], eta4 in [1,3].
struct SLProfile {
  Vector4d S;
  Vector4d L;
  double T_tilde = 0.0;
  Vector4d beta;
  double eta1 = 0.0;
  double eta4 = 0.0;
};

struct ThetaArgs {
  double z = 0.0;  // phase
  double q = 0.0;  // nome, in [0, 1)
};

/// Lambda(r, x^o): the even, O(r^2) integrand combining square-wave modulated
/// cosine/sine sums of alpha_k . x^o. xo must be sorted ascending.
double evaluate_lambda(double r, const Vector4d& xo);

/// Finite-horizon value u^T(t, x). Exact closed forms on the diagonal and at
/// t == T; panel quadrature elsewhere.
double value4(const EvalPoint& p, const QuadratureConfig& cfg = {});

/// Gradient of value4 in x; components sum to 1. Requires t < T.
Vector4d gradient4(const EvalPoint& p, const QuadratureConfig& cfg = {});

/// Gradient clamped to [0,1] and renormalized for use as a probability
/// vector. clamp_count (optional) receives the number of clamped entries.
Vector4d probability_matching4(const EvalPoint& p, const QuadratureConfig& cfg = {},
                               int* clamp_count = nullptr);

/// Hessian via the oscillatory-integral representation (plus its lattice
/// series off ties). Requires t < T.
Matrix4d hessian4_integral(const EvalPoint& p, const QuadratureConfig& cfg = {});

/// Hessian assembled from the S_k / L_k dual series. Requires t < T,
/// theta.x^o < 0 and distinct sorted coordinates; throws otherwise.
Matrix4d hessian4_from_sl(const EvalPoint& p);

/// Dispatcher: picks the representation whose series converges fast at p.
Matrix4d hessian4(const EvalPoint& p, const QuadratureConfig& cfg = {});

/// Time derivative of value4; always <= 0. Requires t < T.
double dt_value4(const EvalPoint& p, const QuadratureConfig& cfg = {});

/// S_k and L_k from their Fourier-dual series. Requires t < T and
/// theta.x^o < 0.
SLProfile sl_profile(const EvalPoint& p);

/// Jacobi theta_3(z, q) = 1 + 2 sum_{l>=1} q^(l^2) cos(2 l z).
double theta3(const ThetaArgs& a);

/// Infinite-product form of theta_3, for cross-checking the series.
double theta3_product(const ThetaArgs& a);

/// Geometric-horizon value for four experts (closed form).
double geometric_value4(const Vector4d& x);

/// Scaled geometric value u^lambda(x) = lambda^{-3/2} u(sqrt(lambda) x).
double u_lambda(double lambda, const Vector4d& x);

namespace detail {

/// Ranked-space gradient (sorted coordinates) via panel quadrature of the
/// first-derivative integral.
Vector4d gradient4_ranked_quadrature(double tau, const Vector4d& xo,
                                     const QuadratureConfig& cfg);

/// Ranked-space gradient via the erf-dual series; exact complement of the
/// quadrature regime (fast when T_tilde is small).
Vector4d gradient4_ranked_series(double tau, const Vector4d& xo);

/// Ranked-space gradient with automatic representation choice.
Vector4d gradient4_ranked(double tau, const Vector4d& xo, const QuadratureConfig& cfg);

}  // namespace detail

}  // namespace expertlab
