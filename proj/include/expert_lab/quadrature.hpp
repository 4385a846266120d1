#pragma once

#include <vector>

namespace expertlab {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule of the given order, computed once and cached. order >= 2.
const GaussLegendre& gauss_legendre(int order);

/// Integrate f over [a, b] with a single fixed-order panel.
template <typename F>
double integrate_panel(F&& f, double a, double b, const GaussLegendre& gl) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i)
    acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return half * acc;
}

}  // namespace expertlab
