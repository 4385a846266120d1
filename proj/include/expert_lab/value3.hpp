#pragma once

#include "expert_lab/core.hpp"

namespace expertlab {

/// Query point for the 3-expert value function, 0 <= t <= T, T > 0.
struct EvalPoint3 {
  double t = 0.0;
  double T = 1.0;
  Vector3d x = Vector3d::Zero();
};

/// Finite-horizon 3-expert value in closed form (Gaussian density and tail
/// terms in the ranked gaps a = 2x^(1)-x^(2)-x^(3), b = x^(2)-x^(3)).
double value3(const EvalPoint3& p);

/// Geometric-horizon 3-expert value:
/// x^(3) + e^{sqrt2 (x^(2)-x^(3))}/(2 sqrt2) + e^{sqrt2 (2x^(1)-x^(2)-x^(3))}/(6 sqrt2).
double geometric_value3(const Vector3d& x);

/// Exact gradient of value3 (erfc forms); components sum to 1 and agree
/// across tied coordinates. Requires t < T.
Vector3d gradient3(const EvalPoint3& p);

}  // namespace expertlab
