#include "expert_lab/core.hpp"

#include <algorithm>
#include <cmath>

namespace expertlab {

const AlphaTheta& alpha_theta() {
  static const AlphaTheta at = [] {
    AlphaTheta a;
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j)
        a.alpha(k, j) = (k == j ? 3.0 : -1.0) / kSqrt2;
    a.theta << 1.0 / kSqrt2, 1.0 / kSqrt2, -1.0 / kSqrt2, -1.0 / kSqrt2;
    return a;
  }();
  return at;
}

RankedState rank_state(const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || n > 4) throw std::domain_error("rank_state: expert count must be 2, 3 or 4");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) throw std::domain_error("rank_state: non-finite entry");

  RankedState rs;
  rs.n = n;
  std::array<int, 4> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.begin() + n,
                   [&](int a, int b) { return x[a] < x[b]; });
  rs.sorted.resize(n);
  for (int k = 0; k < n; ++k) {
    rs.perm[k] = idx[k];
    rs.sorted[k] = x[idx[k]];
  }
  return rs;
}

RankedState rank_state(const Vector4d& x) {
  return rank_state(VectorXd(x));
}

Vector4d collapse_ties(const Vector4d& sorted, double eps) {
  Vector4d out = sorted;
  double rep = out[0];
  for (int k = 1; k < 4; ++k) {
    if (out[k] - rep <= eps)
      out[k] = rep;
    else
      rep = out[k];
  }
  return out;
}

ExpertSubset comb_subset(const VectorXd& x) {
  const RankedState rs = rank_state(x);
  ExpertSubset s;
  s.n = rs.n;
  if (rs.n == 4) {
    s.mask = (1u << rs.perm[1]) | (1u << rs.perm[3]);  // ranks 2 and 4
  } else if (rs.n == 3) {
    s.mask = (1u << rs.perm[0]) | (1u << rs.perm[2]);  // worst and leader
  } else {
    throw std::domain_error("comb_subset: defined for 3 or 4 experts");
  }
  return s;
}

double theta_dot(const VectorXd& x) {
  if (x.size() != 4) throw std::domain_error("theta_dot: four experts required");
  const RankedState rs = rank_state(x);
  return (rs.sorted[0] + rs.sorted[1] - rs.sorted[2] - rs.sorted[3]) / kSqrt2;
}

}  // namespace expertlab
