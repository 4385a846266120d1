#pragma once

#include <cmath>
#include <cstdint>

namespace expertlab {

/// Philox4x32-10 counter-based generator. A stream is fully determined by
/// (seed, stream id), so per-path streams reproduce bit-for-bit regardless
/// of scheduling or worker count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    --have_;
    const std::uint64_t v = out_[have_];
    return v;
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double next_normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    have_normal_ = true;
    return r * std::cos(a);
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = stream_lo_;
    std::uint32_t c3 = stream_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = (static_cast<std::uint64_t>(c0) << 32) | c1;
    out_[1] = (static_cast<std::uint64_t>(c2) << 32) | c3;
    have_ = 2;
    ++block_;
  }

  std::uint32_t key0_, key1_, stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  std::uint64_t out_[2] = {0, 0};
  int have_ = 0;
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace expertlab
