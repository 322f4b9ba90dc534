#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace yaware {

// Stream tags keep derived substreams from colliding with per-sample streams,
// whose first key is a small sample index.
namespace stream_tag {
constexpr std::uint64_t sample = 0x9e3779b900000001ull;   // synthetic sample i
constexpr std::uint64_t site = 0x9e3779b900000002ull;     // per-site effects
constexpr std::uint64_t shuffle = 0x9e3779b900000003ull;  // per-epoch shuffle
constexpr std::uint64_t init = 0x9e3779b900000004ull;     // parameter init
constexpr std::uint64_t subsample = 0x9e3779b900000005ull;
constexpr std::uint64_t inner_fold = 0x9e3779b900000006ull;
constexpr std::uint64_t head = 0x9e3779b900000007ull;     // classifier head init
constexpr std::uint64_t fold = 0x9e3779b900000008ull;     // outer fold split
constexpr std::uint64_t pairs = 0x9e3779b900000009ull;    // evaluation pair draws
}  // namespace stream_tag

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_keys(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Deterministic pseudo-random stream. The engine is std::mt19937_64, whose
// output sequence is fixed by the standard; all distributions are implemented
// here so draw sequences are identical across platforms and toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  RngStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
      : engine_(mix_keys(seed, a, b, c)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard gaussian via Box-Muller; consumes exactly two raw draws.
  double normal() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace yaware
