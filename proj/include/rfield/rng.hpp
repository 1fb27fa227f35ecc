#ifndef RFIELD_RNG_HPP
#define RFIELD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace rfield {

/// Deterministic random stream. All randomness in the library flows from a
/// master seed through named substreams so that every stage of a run is
/// reproducible independently of execution order or thread count. The
/// generator (xoshiro256**) and the normal sampler are fixed here rather than
/// taken from <random>, whose distributions are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) { seed_state(seed); }

  /// Substream derived from a master seed and a stream name; streams with
  /// different names (or counters) are statistically independent.
  Rng(std::uint64_t master, std::string_view stream, std::uint64_t counter = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a over the stream name
    for (char c : stream) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    seed_state(master ^ h ^ (0x9e3779b97f4a7c15ull * (counter + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0,1); never returns exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached spare, so the draw sequence is
  /// a pure function of the call index).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void seed_state(std::uint64_t seed) {
    // SplitMix64 expansion of the seed into the four state words.
    std::uint64_t z = seed;
    for (auto& w : s_) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t t = z;
      t = (t ^ (t >> 30)) * 0xbf58476d1ce4e5b9ull;
      t = (t ^ (t >> 27)) * 0x94d049bb133111ebull;
      w = t ^ (t >> 31);
    }
  }

  std::uint64_t s_[4];
};

} // namespace rfield

#endif
