#include "expert_lab/value3.hpp"

#include <cmath>

namespace expertlab {

namespace {

void validate_point(const EvalPoint3& p) {
  if (!(p.T > 0.0)) throw std::domain_error("EvalPoint3: T must be positive");
  if (!(p.t >= 0.0 && p.t <= p.T)) throw std::domain_error("EvalPoint3: t must lie in [0, T]");
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(p.x[i])) throw std::domain_error("EvalPoint3: non-finite state");
}

struct Gaps {
  Vector3d xo;
  std::array<int, 4> perm;
  double a;  // 2x^(1) - x^(2) - x^(3) <= 0
  double b;  // x^(2) - x^(3) <= 0
};

Gaps gaps_of(const Vector3d& x) {
  const RankedState rs = rank_state(VectorXd(x));
  Gaps g;
  g.perm = rs.perm;
  for (int k = 0; k < 3; ++k) g.xo[k] = rs.sorted[k];
  g.a = 2.0 * g.xo[0] - g.xo[1] - g.xo[2];
  g.b = g.xo[1] - g.xo[2];
  return g;
}

// Gaussian tail integral: int_z^inf e^{-y^2} dy = (sqrt(pi)/2) erfc(z).
double tail(double z) { return 0.5 * std::sqrt(kPi) * std::erfc(z); }

}  // namespace

double value3(const EvalPoint3& p) {
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) return p.x.maxCoeff();
  const Gaps g = gaps_of(p.x);
  const double s = std::sqrt(tau);
  const double inv_s2 = 1.0 / std::sqrt(2.0 * tau);
  double u = g.xo[1] + g.a / 3.0;
  u += s * std::exp(-g.a * g.a / (2.0 * tau)) / (3.0 * std::sqrt(2.0 * kPi));
  u += s * std::exp(-g.b * g.b / (2.0 * tau)) / std::sqrt(2.0 * kPi);
  u -= g.a / (3.0 * std::sqrt(kPi)) * tail(g.a * inv_s2);
  u -= g.b / std::sqrt(kPi) * tail(g.b * inv_s2);
  return u;
}

double geometric_value3(const Vector3d& x) {
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(x[i])) throw std::domain_error("geometric_value3: non-finite state");
  const Gaps g = gaps_of(x);
  return g.xo[2] + std::exp(kSqrt2 * g.b) / (2.0 * kSqrt2) + std::exp(kSqrt2 * g.a) / (6.0 * kSqrt2);
}

Vector3d gradient3(const EvalPoint3& p) {
  validate_point(p);
  const double tau = p.T - p.t;
  if (tau == 0.0) throw std::domain_error("gradient3: undefined at t == T");
  const Gaps g = gaps_of(p.x);
  const double inv_s2 = 1.0 / std::sqrt(2.0 * tau);
  const double Ea = std::erfc(g.a * inv_s2);
  const double Eb = std::erfc(g.b * inv_s2);
  // d(value3)/da = 1/3 - Ea/6 and d/db = -Eb/2 after the density terms cancel;
  // chain rule through (a, b, x^(2)). Tied coordinates come out equal.
  Vector3d ranked;
  ranked[0] = 2.0 / 3.0 - Ea / 3.0;
  ranked[1] = 2.0 / 3.0 + Ea / 6.0 - Eb / 2.0;
  ranked[2] = -1.0 / 3.0 + Ea / 6.0 + Eb / 2.0;
  Vector3d out;
  for (int h = 0; h < 3; ++h) out[g.perm[h]] = ranked[h];
  return out;
}

}  // namespace expertlab
