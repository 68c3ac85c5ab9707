#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace qkd {

/// Small keyed generator used for per-round random streams.  Every round of a
/// run gets its own stream derived from (master seed, round index), so results
/// do not depend on how rounds are distributed over threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() & 1ULL) != 0ULL; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, n).
  std::uint32_t below(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("below: n must be positive");
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Categorical draw over relative weights (renormalized internally).
  std::size_t pick(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("pick: negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("pick: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  /// Draw over absolute probabilities whose sum may fall short of one; the
  /// residual mass maps to the sentinel index probs.size().
  std::size_t pick_with_residual(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size();
  }

 private:
  std::uint64_t state_;
};

/// Decorrelates (master seed, stream id) pairs into fresh seeds.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t stream_id) {
  SplitMix64 g(master ^ (0xA0761D6478BD642FULL * (stream_id + 1ULL)));
  g.next();
  return g.next();
}

}  // namespace qkd
