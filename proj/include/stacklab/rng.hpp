#pragma once

#include <cmath>
#include <cstdint>

namespace stacklab {

// Deterministic generator with hand-rolled distributions. The standard
// <random> distributions are implementation-defined, which would break the
// byte-identical-output contract across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    // warm up so that small seeds do not produce correlated first draws
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift; bias is negligible for the n used here (n << 2^32)
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  // standard normal via Box-Muller (always consumes two draws)
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // child generator with an independent stream
  Rng fork(std::uint64_t stream) const {
    Rng r(0);
    r.state_ = hash_mix(state_ ^ (0xd1342543de82ef95ull * (stream + 1)));
    return r;
  }

  static std::uint64_t hash_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace stacklab
