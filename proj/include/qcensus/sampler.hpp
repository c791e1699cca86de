#pragma once

// Seedable, shardable Haar-random pure states.
//
// Generator: a counter-based SplitMix64 stream. Draw i (i = 1, 2, ...) of a
// stream with key K and odd increment G is mix64(K + i * G), where mix64 is
// the SplitMix64 finalizer. derive_stream(seed, shard) fixes K and G:
//
//   K = mix64(seed ^ mix64(shard + 0x9e3779b97f4a7c15))
//   G = mix_gamma(K + 0x9e3779b97f4a7c15)
//
// mix_gamma(z) = mix64(z) | 1, xored with 0xaaaaaaaaaaaaaaaa when fewer than
// 24 bit transitions remain (as in java.util.SplittableRandom).
//
// Uniforms take the top 53 bits: u = (x >> 11) * 2^-53 in [0, 1). A complex
// Gaussian consumes two draws u1, u2 and applies the Box-Muller transform
// r = sqrt(-2 ln(1 - u1)), z = r * (cos 2 pi u2, sin 2 pi u2).

#include "qcensus/qstate.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace qcensus {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_gamma(std::uint64_t z) {
  z = mix64(z) | 1ULL;
  if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
  return z;
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t shard)
      : seed_(seed),
        shard_(shard),
        key_(mix64(seed ^ mix64(shard + kGoldenGamma))),
        gamma_(mix_gamma(key_ + kGoldenGamma)) {}

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t shard() const { return shard_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * gamma_); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  Complex complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t shard_;
  std::uint64_t key_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
};

inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t shard) {
  return RandomStream(seed, shard);
}

namespace detail {
inline void check_sampler_qubits(int n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("sampler: qubit count out of range [1,13]");
}
}  // namespace detail

/// Independent standard complex Gaussian amplitudes, normalized.
inline PureState haar_pure_gaussian(int n, RandomStream& s) {
  detail::check_sampler_qubits(n);
  ComplexVector a(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = s.complex_gaussian();
  return PureState::normalized(n, std::move(a));
}

/// Builds the state from hyperspherical angles and phases:
///   a_j = e^{i chi_j} sin(theta_0) ... sin(theta_{j-1}) cos(theta_j),
///   a_{d-1} = e^{i chi_{d-1}} sin(theta_0) ... sin(theta_{d-2}),
/// given sin(theta_j) for j < d - 1 and d phases chi_j.
inline PureState hyperspherical_state(int n, std::span<const double> sin_theta,
                                      std::span<const double> phases) {
  detail::check_sampler_qubits(n);
  const std::size_t d = std::size_t{1} << n;
  if (sin_theta.size() != d - 1 || phases.size() != d)
    throw std::invalid_argument("hyperspherical_state: need 2^n - 1 angles and 2^n phases");
  ComplexVector a(static_cast<Eigen::Index>(d));
  double radial = 1.0;
  for (std::size_t j = 0; j + 1 < d; ++j) {
    const double s = sin_theta[j];
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("hyperspherical_state: sin(theta) outside [0,1]");
    const double c = std::sqrt((1.0 - s) * (1.0 + s));
    a(static_cast<Eigen::Index>(j)) = std::polar(radial * c, phases[j]);
    radial *= s;
  }
  a(static_cast<Eigen::Index>(d - 1)) = std::polar(radial, phases[d - 1]);
  return PureState::normalized(n, std::move(a));
}

/// Haar sampling through the hyperspherical parametrization: for angle j
/// of d - 1, sin(theta_j)^(2(d-1-j)) is uniform on [0,1]; phases uniform.
inline PureState haar_pure_hyperspherical(int n, RandomStream& s) {
  detail::check_sampler_qubits(n);
  const std::size_t d = std::size_t{1} << n;
  std::vector<double> sin_theta(d - 1);
  std::vector<double> phases(d);
  for (std::size_t j = 0; j + 1 < d; ++j) {
    const double u = 1.0 - s.uniform();  // (0, 1]
    sin_theta[j] = std::exp(std::log(u) / (2.0 * static_cast<double>(d - 1 - j)));
  }
  for (std::size_t j = 0; j < d; ++j) phases[j] = 2.0 * std::numbers::pi * s.uniform();
  return hyperspherical_state(n, sin_theta, phases);
}

}  // namespace qcensus
