#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace atlas {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Mixes an arbitrary number of 64-bit words into one stream seed. Used to
// derive independent substreams (per epoch, per node, per hop) from a root
// seed so that results do not depend on batch composition or thread order.
inline uint64_t mix_seed(uint64_t a) { return splitmix64(a); }
template <typename... Rest>
uint64_t mix_seed(uint64_t a, Rest... rest) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ull + mix_seed(static_cast<uint64_t>(rest)...)));
}

// xoshiro256++ with splitmix64 seeding. All sampling and initialization in
// the project goes through this class; the standard <random> distributions
// are implementation-defined, so uniform/normal transforms are hand-rolled
// to keep fixed-seed outputs reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) {
      x = splitmix64(x);
      w = x;
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next() % n; }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive lo, exclusive hi
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo)));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in ascending order. k <= n.
  std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k);

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

inline std::vector<int64_t> Rng::sample_without_replacement(int64_t n, int64_t k) {
  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(k));
  if (k >= n) {
    for (int64_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  // Partial Fisher-Yates over an index array; selection order is discarded
  // by the final sort so callers see a canonical (stored) order.
  std::vector<int64_t> idx(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (int64_t i = 0; i < k; ++i) {
    const int64_t j = i + static_cast<int64_t>(below(static_cast<uint64_t>(n - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  out.assign(idx.begin(), idx.begin() + static_cast<long>(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace atlas
