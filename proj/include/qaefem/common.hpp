#ifndef QAEFEM_COMMON_HPP
#define QAEFEM_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qaefem {

using Vector = std::vector<double>;
using BitString = std::vector<std::uint8_t>;

/// Base class for all qaefem errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct UnsupportedOrder : Error { using Error::Error; };
struct NonConformingMesh : Error { using Error::Error; };
struct ZeroSource : Error { using Error::Error; };
struct SingularOperator : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct EmptyBracket : Error { using Error::Error; };
struct OrthogonalGroundState : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// -- Deterministic counter-based RNG -----------------------------------------
//
// All stochastic components derive their streams from 64-bit keys via
// splitmix64, so results are reproducible regardless of evaluation order.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hash-combine two seeds into a new stream key.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

/// Small deterministic PRNG (splitmix64 stream).
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Standard normal deviate (Box-Muller, no cached spare).
    double normal();

  private:
    std::uint64_t state_;
};

}  // namespace qaefem

#endif
