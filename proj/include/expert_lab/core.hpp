#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace expertlab {

using Eigen::Matrix4d;
using Eigen::Vector3d;
using Eigen::Vector4d;
using Eigen::VectorXd;

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kPi = 3.141592653589793;

/// Raised when a quadrature or series fails to converge within its budget.
/// Carries the partial estimate accumulated so far.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double partial)
      : std::runtime_error(what), partial_estimate(partial) {}
  double partial_estimate;
};

/// Raised when a solver exceeds its resource budget (e.g. DP depth).
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, int completed)
      : std::runtime_error(what), completed_depth(completed) {}
  int completed_depth;
};

/// Contrast vectors used throughout the 4-expert closed forms:
/// alpha.row(k)[j] = 3/sqrt(2) if k==j else -1/sqrt(2), theta = (1,1,-1,-1)/sqrt(2).
/// Rows and columns of alpha sum to zero, theta.sum() == 0.
struct AlphaTheta {
  Matrix4d alpha;
  Vector4d theta;
};

const AlphaTheta& alpha_theta();

/// Sorted view of a state: sorted[k] = values[perm[k]], ascending.
/// Equal values keep their original index order (stable tie rule).
struct RankedState {
  VectorXd sorted;
  std::array<int, 4> perm{};  // rank -> original index, entries [0, n)
  int n = 0;
};

/// Subset of experts {0, .., n-1} as a bitmask.
struct ExpertSubset {
  std::uint32_t mask = 0;
  int n = 0;

  bool contains(int i) const { return (mask >> i) & 1u; }
  int count() const { return __builtin_popcount(mask); }
  ExpertSubset complement() const {
    return {~mask & ((1u << n) - 1u), n};
  }
};

/// Stable ascending sort with the lowest-original-index tie rule.
/// Throws std::domain_error on non-finite entries or n outside {2,3,4}.
RankedState rank_state(const VectorXd& x);
RankedState rank_state(const Vector4d& x);

/// Snap groups of adjacent sorted values closer than eps to the first value
/// of the group, so downstream branch selection is consistent near ties.
Vector4d collapse_ties(const Vector4d& sorted, double eps);

/// Adversary comb action: ranks {2,4} for four experts, {1,3} (worst and
/// leader) for three. Returned as original-index bitmask.
ExpertSubset comb_subset(const VectorXd& x);

/// theta . x^o = (x^(1)+x^(2)-x^(3)-x^(4))/sqrt(2), always <= 0,
/// zero exactly when all coordinates are equal. Four experts only.
double theta_dot(const VectorXd& x);

}  // namespace expertlab
