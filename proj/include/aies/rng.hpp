#pragma once

// Counter-based random streams.
//
// Every random number used by a sampler is addressed by
// (master seed, iteration, walker, role). A stream is a pure function of that
// key and an internal draw counter, so two runs that request the same key see
// the same numbers no matter which thread asks or in which order walkers are
// processed. This is what makes the affine-equivariance regression exact.
//
// Draw-order contract for one walker update at iteration m:
//   1. DrawRole::partners  - partner index / indices from the complementary group
//   2. DrawRole::noise     - move randomness (Z, xi, or momentum components)
//   3. DrawRole::accept    - the single uniform used for accept/reject
// Each role has its own stream, so a move that needs more noise draws never
// shifts the accept uniform.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>

namespace aies {

enum class DrawRole : std::uint8_t { partners = 0, noise = 1, accept = 2, init = 3 };

namespace detail {

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t v, std::uint64_t salt) noexcept {
  return mix64(h ^ mix64(v + salt));
}

}  // namespace detail

/// A reproducible stream of 64-bit words: draw k is mix64(key + k * golden).
/// Satisfies UniformRandomBitGenerator so it also plugs into <random>.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return next_u64(); }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1); never returns 0, so log() is safe.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Multiply-shift reduction; bias is below 2^-64 * n.
  std::size_t below(std::size_t n) noexcept {
    const auto wide = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(wide >> 64);
  }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t words_drawn() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Master seed plus the derivation rule for per-(iteration, walker, role) streams.
struct RngPlan {
  std::uint64_t master_seed = 0;

  constexpr Stream stream(std::uint64_t iteration, std::uint64_t walker, DrawRole role) const noexcept {
    std::uint64_t h = detail::mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
    h = detail::absorb(h, iteration, 0xbb67ae8584caa73bULL);
    h = detail::absorb(h, walker, 0x3c6ef372fe94f82bULL);
    h = detail::absorb(h, static_cast<std::uint64_t>(role), 0xa54ff53a5f1d36f1ULL);
    return Stream(h);
  }

  /// Stream used to draw the initial position of a walker.
  constexpr Stream initial_stream(std::uint64_t walker) const noexcept {
    return stream(std::numeric_limits<std::uint64_t>::max(), walker, DrawRole::init);
  }
};

constexpr Stream derive_stream(const RngPlan& plan, std::uint64_t iteration, std::uint64_t walker,
                               DrawRole role) noexcept {
  return plan.stream(iteration, walker, role);
}

}  // namespace aies
