#pragma once

#include "expert_lab/core.hpp"
#include "expert_lab/value4.hpp"

#include <cstdint>
#include <vector>

namespace expertlab {

enum class PlayerKind { probability_matching, uniform, follow_the_leader, multiplicative_weights };

struct PlayerStrategy {
  PlayerKind kind = PlayerKind::probability_matching;
  double eta = 0.0;  // multiplicative weights rate; <= 0 picks sqrt(8 ln N / M)
};

enum class AdversaryKind { comb, balanced_comb, uniform_subset, fixed_subset };

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::balanced_comb;
  std::uint32_t fixed_mask = 0;  // for fixed_subset, bitmask over experts
};

struct SimConfig {
  int M = 100;
  double T = 1.0;
  int N = 4;
  long paths = 10000;
  std::uint64_t seed = 1;
  PlayerStrategy player;
  AdversaryStrategy adversary;
  int threads = 1;
};

struct RegretEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long paths = 0;
  long clamp_count = 0;  // clamped probability-matching evaluations (expected 0)
  double wall_seconds = 0.0;
  // mean and standard error of the average final coordinate sum_i X_i / N
  // (zero drift under the balanced comb with a uniform player)
  double drift_mean = 0.0;
  double drift_stderr = 0.0;
};

/// Monte Carlo of the repeated game: per round the adversary draws a winning
/// subset and the player independently draws an expert; the state gains
/// e_J - 1{I in J} . 1. Returns mean and standard error of the final regret
/// max_i X_i. Deterministic given the seed, for any thread count.
RegretEstimate estimate_regret(const SimConfig& cfg);

struct SdeConfig {
  EvalPoint point;
  int steps = 1000;
  long paths = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Euler-Maruyama estimate of E[Phi(X_T)] under the comb-controlled
/// diffusion: one shared Brownian increment per step moves both comb
/// coordinates together.
RegretEstimate sde_feynman_kac(const SdeConfig& cfg);

struct CurveRow {
  int M = 0;
  double scaled_mean = 0.0;
  double scaled_stderr = 0.0;
};

/// Scaled-regret trend mean/sqrt(M) over a list of maturities.
std::vector<CurveRow> regret_curve(SimConfig base, const std::vector<int>& Ms);

/// Number of workers to use: explicit request, else EXPERT_LAB_THREADS,
/// else 1; clamped to hardware concurrency.
int resolve_threads(int requested);

}  // namespace expertlab
