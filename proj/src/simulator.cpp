#include "expert_lab/simulator.hpp"

#include "expert_lab/rng.hpp"
#include "expert_lab/value3.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace expertlab {

namespace {

using Clock = std::chrono::steady_clock;

// Pairwise reduction keeps the floating-point sum independent of worker count.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

struct MeanStderr {
  double mean, se;
};

MeanStderr reduce(const std::vector<double>& vals) {
  const std::size_t n = vals.size();
  const double mean = pairwise_sum(vals.data(), n) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = vals[i] - mean;
    dev[i] = d * d;
  }
  const double var = n > 1 ? pairwise_sum(dev.data(), n) / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

template <typename Body>
void run_paths(long paths, int threads, Body&& body) {
  if (threads <= 1) {
    for (long p = 0; p < paths; ++p) body(p);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long p = next.fetch_add(1);
      if (p >= paths) return;
      body(p);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Stable ascending ranking of a small integer state.
template <int N>
std::array<int, N> rank_indices(const std::array<int, N>& x) {
  std::array<int, N> idx;
  for (int i = 0; i < N; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
  return idx;
}

std::uint32_t comb_mask_of(const std::array<int, 4>& x, int n) {
  if (n == 4) {
    const auto idx = rank_indices<4>(x);
    return (1u << idx[1]) | (1u << idx[3]);
  }
  std::array<int, 3> x3{x[0], x[1], x[2]};
  const auto idx = rank_indices<3>(x3);
  return (1u << idx[0]) | (1u << idx[2]);
}

// Probability-matching evaluations cached per (round layer, normalized
// sorted node); values are identical whichever worker fills them first.
class PmCache {
 public:
  PmCache(int M, double T, const QuadratureConfig& qcfg)
      : M_(M), T_(T), qcfg_(qcfg), layers_(M) {}

  // Ranked probabilities for the decision of round m (1-based), evaluated at
  // time (m-1) T / M and the scaled sorted state.
  Vector4d ranked_probs(int m, const std::array<int, 4>& sorted_node, long& clamps) {
    std::uint64_t key = 0;
    for (int k = 0; k < 4; ++k)
      key |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(sorted_node[k]) & 0xFFFFu)
             << (16 * k);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = layers_[m - 1].find(key);
      if (it != layers_[m - 1].end()) return it->second;
    }
    const double tau = T_ * static_cast<double>(M_ - (m - 1)) / M_;
    const double scale = std::sqrt(T_) / std::sqrt(static_cast<double>(M_));
    Vector4d xo;
    for (int k = 0; k < 4; ++k) xo[k] = sorted_node[k] * scale;
    Vector4d g = detail::gradient4_ranked(tau, xo, qcfg_);
    int clamped = 0;
    for (int i = 0; i < 4; ++i) {
      if (g[i] < 0.0) {
        if (g[i] < -1e-10) ++clamped;
        g[i] = 0.0;
      }
    }
    g /= g.sum();
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto [it, inserted] = layers_[m - 1].emplace(key, g);
      if (inserted && clamped) clamps += clamped;
      return it->second;
    }
  }

 private:
  int M_;
  double T_;
  QuadratureConfig qcfg_;
  std::vector<std::unordered_map<std::uint64_t, Vector4d>> layers_;
  std::mutex mu_;
};

int categorical(const double* probs, int n, double u) {
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

void validate_sim(const SimConfig& cfg) {
  if (cfg.M < 1) throw std::domain_error("SimConfig: M must be >= 1");
  if (cfg.paths < 1) throw std::domain_error("SimConfig: paths must be >= 1");
  if (!(cfg.T > 0.0)) throw std::domain_error("SimConfig: T must be positive");
  if (cfg.N != 3 && cfg.N != 4) throw std::domain_error("SimConfig: N must be 3 or 4");
  if (cfg.M > 60000) throw std::domain_error("SimConfig: M too large");
  if (cfg.adversary.kind == AdversaryKind::fixed_subset &&
      (cfg.adversary.fixed_mask >> cfg.N) != 0)
    throw std::domain_error("SimConfig: fixed subset outside expert range");
}

}  // namespace

int resolve_threads(int requested) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("EXPERT_LAB_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = 1;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, std::max(1, hw));
}

RegretEstimate estimate_regret(const SimConfig& cfg) {
  validate_sim(cfg);
  const auto t0 = Clock::now();
  const int N = cfg.N;
  const int n_masks = 1 << N;
  QuadratureConfig qcfg;
  PmCache pm(cfg.M, cfg.T, qcfg);
  const double mw_eta =
      cfg.player.eta > 0.0 ? cfg.player.eta : std::sqrt(8.0 * std::log(double(N)) / cfg.M);

  std::vector<double> regret(cfg.paths);
  std::vector<double> drift(cfg.paths);
  std::mutex clamp_mu;
  long clamp_total = 0;

  run_paths(cfg.paths, resolve_threads(cfg.threads), [&](long path) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    std::array<int, 4> X{0, 0, 0, 0};
    long clamps_local = 0;
    for (int m = 1; m <= cfg.M; ++m) {
      // adversary move
      std::uint32_t J;
      switch (cfg.adversary.kind) {
        case AdversaryKind::comb:
          J = comb_mask_of(X, N);
          break;
        case AdversaryKind::balanced_comb: {
          const std::uint32_t c = comb_mask_of(X, N);
          J = rng.next_double() < 0.5 ? c : (~c & (n_masks - 1u));
          break;
        }
        case AdversaryKind::uniform_subset:
          J = static_cast<std::uint32_t>(rng.next_double() * n_masks);
          if (J >= static_cast<std::uint32_t>(n_masks)) J = n_masks - 1;
          break;
        case AdversaryKind::fixed_subset:
          J = cfg.adversary.fixed_mask;
          break;
        default:
          throw std::domain_error("estimate_regret: unknown adversary");
      }

      // player move
      int I;
      switch (cfg.player.kind) {
        case PlayerKind::uniform: {
          I = static_cast<int>(rng.next_double() * N);
          if (I >= N) I = N - 1;
          break;
        }
        case PlayerKind::follow_the_leader: {
          I = 0;
          for (int i = 1; i < N; ++i)
            if (X[i] > X[I]) I = i;
          break;
        }
        case PlayerKind::multiplicative_weights: {
          double w[4], tot = 0.0;
          int xmax = X[0];
          for (int i = 1; i < N; ++i) xmax = std::max(xmax, X[i]);
          for (int i = 0; i < N; ++i) {
            w[i] = std::exp(mw_eta * (X[i] - xmax));
            tot += w[i];
          }
          for (int i = 0; i < N; ++i) w[i] /= tot;
          I = categorical(w, N, rng.next_double());
          break;
        }
        case PlayerKind::probability_matching: {
          double probs[4];
          if (N == 4) {
            const auto idx = rank_indices<4>(X);
            std::array<int, 4> node;
            for (int k = 0; k < 4; ++k) node[k] = X[idx[k]] - X[idx[0]];
            Vector4d ranked;
            try {
              ranked = pm.ranked_probs(m, node, clamps_local);
            } catch (const NumericError& e) {
              throw NumericError(std::string(e.what()) + " at round " + std::to_string(m),
                                 e.partial_estimate);
            }
            for (int k = 0; k < 4; ++k) probs[idx[k]] = ranked[k];
          } else {
            // 3-expert probability matching from the closed-form gradient
            const double tau = cfg.T * static_cast<double>(cfg.M - (m - 1)) / cfg.M;
            const double scale = std::sqrt(cfg.T / static_cast<double>(cfg.M));
            Vector3d x3;
            for (int k = 0; k < 3; ++k) x3[k] = X[k] * scale;
            Vector3d g = gradient3({0.0, tau, x3});
            for (int k = 0; k < 3; ++k) probs[k] = std::max(g[k], 0.0);
            const double s = probs[0] + probs[1] + probs[2];
            for (int k = 0; k < 3; ++k) probs[k] /= s;
          }
          I = categorical(probs, N, rng.next_double());
          break;
        }
        default:
          throw std::domain_error("estimate_regret: unknown player");
      }

      const int followed = (J >> I) & 1;
      for (int i = 0; i < N; ++i) X[i] += ((J >> i) & 1) - followed;
    }
    int best = X[0], total = X[0];
    for (int i = 1; i < N; ++i) {
      best = std::max(best, X[i]);
      total += X[i];
    }
    regret[path] = static_cast<double>(best);
    drift[path] = static_cast<double>(total) / N;
    if (clamps_local) {
      std::lock_guard<std::mutex> lock(clamp_mu);
      clamp_total += clamps_local;
    }
  });

  const MeanStderr ms = reduce(regret);
  const MeanStderr dr = reduce(drift);
  RegretEstimate out;
  out.mean = ms.mean;
  out.stderr_ = ms.se;
  out.paths = cfg.paths;
  out.clamp_count = clamp_total;
  out.drift_mean = dr.mean;
  out.drift_stderr = dr.se;
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

RegretEstimate sde_feynman_kac(const SdeConfig& cfg) {
  if (cfg.steps < 1) throw std::domain_error("SdeConfig: steps must be >= 1");
  if (cfg.paths < 1) throw std::domain_error("SdeConfig: paths must be >= 1");
  const auto t0 = Clock::now();
  const double tau = cfg.point.T - cfg.point.t;
  if (!(tau >= 0.0)) throw std::domain_error("SdeConfig: t must not exceed T");

  RegretEstimate out;
  out.paths = cfg.paths;
  if (tau == 0.0) {
    out.mean = cfg.point.x.maxCoeff();
    out.stderr_ = 0.0;
    return out;
  }

  const double dt = tau / cfg.steps;
  const double sdt = std::sqrt(dt);
  std::vector<double> vals(cfg.paths);
  run_paths(cfg.paths, resolve_threads(cfg.threads), [&](long path) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    double x[4] = {cfg.point.x[0], cfg.point.x[1], cfg.point.x[2], cfg.point.x[3]};
    for (int s = 0; s < cfg.steps; ++s) {
      // stable ranks of four doubles
      int idx[4] = {0, 1, 2, 3};
      for (int i = 1; i < 4; ++i) {
        const int v = idx[i];
        int j = i;
        while (j > 0 && x[v] < x[idx[j - 1]]) {
          idx[j] = idx[j - 1];
          --j;
        }
        idx[j] = v;
      }
      const double dz = sdt * rng.next_normal();
      x[idx[1]] += dz;
      x[idx[3]] += dz;
    }
    vals[path] = std::max(std::max(x[0], x[1]), std::max(x[2], x[3]));
  });

  const MeanStderr ms = reduce(vals);
  out.mean = ms.mean;
  out.stderr_ = ms.se;
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

std::vector<CurveRow> regret_curve(SimConfig base, const std::vector<int>& Ms) {
  std::vector<CurveRow> rows;
  for (int M : Ms) {
    base.M = M;
    const RegretEstimate est = estimate_regret(base);
    const double s = std::sqrt(static_cast<double>(M));
    rows.push_back({M, est.mean / s, est.stderr_ / s});
  }
  return rows;
}

}  // namespace expertlab
