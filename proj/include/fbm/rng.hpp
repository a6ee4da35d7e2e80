#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fbm::rng {

// Philox4x32-10 counter-based generator (Salmon et al. reference constants).
// Counter-based: fixed (key, counter) always yields the same block, so streams
// derived from distinct keys are independent and parallel-safe.
struct Philox4x32 {
  using result_type = std::uint32_t;

  std::array<std::uint32_t, 4> counter{0, 0, 0, 0};
  std::array<std::uint32_t, 2> key{0, 0};

  static constexpr std::uint32_t M0 = 0xD2511F53u;
  static constexpr std::uint32_t M1 = 0xCD9E8D57u;
  static constexpr std::uint32_t W0 = 0x9E3779B9u;
  static constexpr std::uint32_t W1 = 0xBB67AE85u;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<std::uint32_t>::max(); }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
      k[0] += W0;
      k[1] += W1;
    }
    return c;
  }

  result_type operator()() {
    if (have_ == 0) {
      buf_ = block(counter, key);
      // 128-bit counter increment
      if (++counter[0] == 0 && ++counter[1] == 0 && ++counter[2] == 0) ++counter[3];
      have_ = 4;
    }
    return buf_[4 - (have_--)];
  }

 private:
  std::array<std::uint32_t, 4> buf_{};
  int have_ = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// module identifiers for stream derivation (documented in the README)
enum : std::uint64_t {
  kModuleCore = 1,
  kModuleFraccalc = 2,
  kModuleConditioning = 3,
  kModuleBesov = 4,
  kModuleSewing = 5,
  kModuleSde = 6,
  kModuleErgodics = 7,
  kModuleCli = 8,
};

// uniform/gaussian draws on top of Philox; Box-Muller with cached spare so the
// exact sequence is pinned (std::normal_distribution is implementation-defined)
struct Stream {
  Philox4x32 gen;

  explicit Stream(std::uint64_t key64 = 0) {
    gen.key = {static_cast<std::uint32_t>(key64), static_cast<std::uint32_t>(key64 >> 32)};
  }

  std::uint32_t next_u32() { return gen(); }
  std::uint64_t next_u64() {
    std::uint64_t a = gen();
    return (a << 32) | gen();
  }

  // uniform in (0,1), 53-bit resolution, never exactly 0 or 1
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = two_pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// stream key = chained splitmix64 over (master, module, index); this is the
// documented derivation hash for all per-path streams
inline Stream derive_stream(std::uint64_t master, std::uint64_t module_id, std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ module_id);
  s = splitmix64(s ^ index);
  return Stream(s);
}

}  // namespace fbm::rng
