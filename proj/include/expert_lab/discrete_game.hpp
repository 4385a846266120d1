#pragma once

#include "expert_lab/core.hpp"
#include "expert_lab/value4.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace expertlab {

/// Optimal mixed action and value of one Bellman step:
///   min over player mixtures alpha of max over subsets J of c_J - sum_{i in J} alpha_i.
struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> mixture;  // optimal alpha on the N-simplex (may be non-unique)
};

/// Solve the one-round matrix game by dense simplex (Bland's rule).
/// subset_cost[mask] is the cost of adversary subset `mask`, all 2^N entries.
MatrixGameSolution bellman_value(const std::vector<double>& subset_cost, int n_experts);

struct DPConfig {
  int max_rounds = 40;
};

/// Which game a DPTable holds.
enum class GameKind { exact, fixed_adversary, fixed_player };

/// Backward-induction table over normalized nodes (sorted, min 0).
/// Keys pack the sorted tuple; offsets are re-added at lookup.
struct DPTable {
  int M = 0;
  int N = 0;
  GameKind kind = GameKind::exact;
  double lp_tolerance = 1e-9;
  std::vector<std::unordered_map<std::uint64_t, double>> layers;

  double root() const;  // value at round 0, state 0
  std::size_t node_count() const;
};

/// Exact minimax value V^M by backward induction with the LP step.
DPTable solve_exact(int M, int N, const DPConfig& cfg = {});

/// Lower game: adversary fixed to the balanced comb, player best-responds.
/// Four experts only.
DPTable solve_fixed_adversary(int M, int N, const DPConfig& cfg = {});

/// Upper game: player fixed to probability matching (gradient of the
/// continuum value at the scaled state), adversary best-responds. Four
/// experts only.
DPTable solve_fixed_player(int M, int N, const QuadratureConfig& qcfg = {},
                           const DPConfig& cfg = {});

struct ConvergenceRow {
  int M = 0;
  double v = 0.0;
  double v_lower = 0.0;  // NaN when not computed
  double v_upper = 0.0;  // NaN when not computed
  double scaled_v = 0.0;
  double scaled_lower = 0.0;
  double scaled_upper = 0.0;
};

/// Scaled-value trend over a list of maturities. Lower/upper games are
/// included for N == 4.
std::vector<ConvergenceRow> convergence_table(const std::vector<int>& Ms, int N,
                                              const QuadratureConfig& qcfg = {},
                                              const DPConfig& cfg = {});

namespace detail {

/// Pack a normalized sorted tuple (first entry 0) into a key.
std::uint64_t pack_node(const std::array<int, 4>& sorted, int n);

/// Normalize an arbitrary integer state: sort ascending, subtract the
/// minimum. Returns the packed key and the subtracted offset.
std::pair<std::uint64_t, int> normalize_state(std::array<int, 4> state, int n);

}  // namespace detail

}  // namespace expertlab
