#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace erp {

/// Purpose tags partition the random streams so that, for a fixed global
/// seed, training paths, test paths, initialization, shuffling and Monte
/// Carlo pricing never share draws.
enum class Stream : std::uint64_t {
  returns = 1,
  regimes = 2,
  jumps = 3,
  iv_noise = 4,
  init = 5,
  shuffle = 6,
  v0_draw = 7,
  pricing = 8,
  generic = 9,
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the k-th output of a stream is a pure function
/// of (key, k), where key = hash(global_seed, index, tag). Streams for
/// different paths are therefore independent of evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t global_seed, std::uint64_t index, Stream tag)
      : key_(derive_key(global_seed, index, static_cast<std::uint64_t>(tag))) {}

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t index,
                                            std::uint64_t tag) {
    std::uint64_t k = detail::mix64(seed + detail::kGolden);
    k = detail::mix64(k ^ (index * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
    k = detail::mix64(k ^ (tag * 0x8CB92BA72F3D8DD7ULL + 0x2545F4914F6CDD1DULL));
    return k;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1); 53 random bits.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson by sequential inversion; large means are split into pieces
  /// below 30 so the inversion never underflows (the sum is exact in law).
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; bias < 2^-64 * n, irrelevant at our sizes.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t poisson_small(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace erp
