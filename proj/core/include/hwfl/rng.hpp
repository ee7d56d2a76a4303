#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hwfl {

/// Independent random streams derived from one trial seed. Each mechanism
/// draws from its own stream so toggling one never shifts another.
enum class Stream : std::uint64_t {
  kData = 1,
  kValidation = 2,
  kInit = 3,
  kShuffle = 4,
  kSelection = 5,
  kLatency = 6,
};

/// Hashes an ordered list of words into a 64-bit seed (splitmix64 chaining).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

inline std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  return mix_seed({root, static_cast<std::uint64_t>(stream), a, b});
}

/// Seeded generator whose variates are bit-reproducible across standard
/// libraries. std::mt19937_64 output is fixed by the standard; the std::
/// distributions are not, so the variate transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Unbiased integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost trick.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hwfl
